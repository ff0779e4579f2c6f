//! Right-hand sides for the nonlinear and linearized transport systems,
//! explicit RK4 stepping with CFL control, and exact reference propagators.
//!
//! The production path keeps the state in spectral space across a run:
//! advection products are formed in physical space from two-thirds-dealiased
//! factors and the product is dealiased again; the vertical transport term
//! stays spectral (`i k_z` multiplication) and is exact. With that layout the
//! semi-discrete system conserves every `L^p` norm of `theta` and `eta`, so
//! the only drift left to measure comes from the time integrator.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::analysis::{ConservationTracker, DiagnosticsRecord};
use crate::biot_savart::invert_vorticity_spectral;
use crate::error::{Error, Result};
use crate::grid::{
    dealias_23_in_place, forward_pair, inverse_pair, spectral_derivative, transform_forward,
    transform_inverse, Axis, GridSpec, ScalarField, SpectralField,
};
use crate::state::{ModelParams, ThetaEtaState};

/// Uniform time grid: node k sits at `t0 + k*dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub nsteps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, nsteps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if nsteps == 0 {
            return Err(Error::InvalidParameter("nsteps must be positive".into()));
        }
        Ok(TimeGrid { t0, dt, nsteps })
    }

    #[inline]
    pub fn node_time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    #[inline]
    pub fn t_end(&self) -> f64 {
        self.node_time(self.nsteps)
    }
}

/// Time derivative of a state.
#[derive(Debug, Clone)]
pub struct Tendency {
    pub dtheta_dt: ScalarField,
    pub deta_dt: ScalarField,
}

// Test hook: disabling dealiasing lets the verification suite demonstrate
// that the conservation properties catch the resulting aliasing errors.
static DEALIAS_DISABLED: AtomicBool = AtomicBool::new(false);

pub fn set_dealias_disabled(disabled: bool) {
    DEALIAS_DISABLED.store(disabled, Ordering::SeqCst);
}

fn dealias(f: &mut SpectralField) {
    if !DEALIAS_DISABLED.load(Ordering::SeqCst) {
        dealias_23_in_place(f);
    }
}

/// Spectral-space state used by the propagators.
#[derive(Debug, Clone)]
pub(crate) struct SpecState {
    pub theta: SpectralField,
    pub eta: SpectralField,
}

impl SpecState {
    pub fn of(s: &ThetaEtaState) -> Self {
        let (theta, eta) = forward_pair(&s.theta, &s.eta);
        SpecState { theta, eta }
    }

    pub fn to_physical(&self) -> ThetaEtaState {
        let (theta, eta) = inverse_pair(&self.theta, &self.eta);
        ThetaEtaState { theta, eta }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.eta.is_finite()
    }
}

/// Advective part of the tendency for given spectral velocity coefficients:
/// `-(u d/dx + v d/dy)` applied to theta and eta. All four product factors
/// (velocity components and horizontal gradients) are dealiased before the
/// physical-space product, and the product is dealiased again. Returns the
/// spectral tendencies plus the grid max speed (for CFL checks).
fn advective_tendency(
    s: &SpecState,
    u_hat: &SpectralField,
    v_hat: &SpectralField,
) -> (SpectralField, SpectralField, f64) {
    let mut theta_d = s.theta.clone();
    let mut eta_d = s.eta.clone();
    dealias(&mut theta_d);
    dealias(&mut eta_d);
    let mut u_hat = u_hat.clone();
    let mut v_hat = v_hat.clone();
    dealias(&mut u_hat);
    dealias(&mut v_hat);

    let (u, v) = inverse_pair(&u_hat, &v_hat);
    let (tx, ty) = inverse_pair(
        &spectral_derivative(&theta_d, Axis::X),
        &spectral_derivative(&theta_d, Axis::Y),
    );
    let (ex, ey) = inverse_pair(
        &spectral_derivative(&eta_d, Axis::X),
        &spectral_derivative(&eta_d, Axis::Y),
    );

    let mut adv_t = vec![0.0f64; u.values().len()];
    let mut adv_e = vec![0.0f64; u.values().len()];
    let mut max_speed = 0.0f64;
    for i in 0..adv_t.len() {
        let uu = u.values()[i];
        let vv = v.values()[i];
        max_speed = max_speed.max(uu.abs()).max(vv.abs());
        adv_t[i] = -(uu * tx.values()[i] + vv * ty.values()[i]);
        adv_e[i] = -(uu * ex.values()[i] + vv * ey.values()[i]);
    }
    let grid = *s.theta.grid();
    let adv_t = ScalarField::from_values(grid, adv_t).expect("sized");
    let adv_e = ScalarField::from_values(grid, adv_e).expect("sized");
    let (mut at_hat, mut ae_hat) = forward_pair(&adv_t, &adv_e);
    dealias(&mut at_hat);
    dealias(&mut ae_hat);
    (at_hat, ae_hat, max_speed)
}

/// Add the vertical transport `+U0 d theta/dz`, `-U0 d eta/dz` in place.
fn add_vertical_transport(
    s: &SpecState,
    u0: f64,
    dtheta: &mut SpectralField,
    deta: &mut SpectralField,
) {
    if u0 == 0.0 {
        return;
    }
    let tz = spectral_derivative(&s.theta, Axis::Z);
    let ez = spectral_derivative(&s.eta, Axis::Z);
    *dtheta = dtheta.add_scaled(u0, &tz);
    *deta = deta.add_scaled(-u0, &ez);
}

pub(crate) struct SpecTendency {
    pub theta: SpectralField,
    pub eta: SpectralField,
    pub max_speed: f64,
}

/// Provider of spectral tendencies for the stepping loop.
pub(crate) trait RhsSpec {
    fn eval(&mut self, s: &SpecState, t: f64, params: &ModelParams) -> SpecTendency;
}

/// Self-consistent velocity: recomputed from the state's own vorticity.
pub(crate) struct NonlinearRhs;

impl RhsSpec for NonlinearRhs {
    fn eval(&mut self, s: &SpecState, _t: f64, params: &ModelParams) -> SpecTendency {
        let omega_hat = s.theta.add_scaled(-1.0, &s.eta).scaled(1.0 / (2.0 * params.l));
        let (u_hat, v_hat) = invert_vorticity_spectral(&omega_hat);
        let (mut dtheta, mut deta, max_speed) = advective_tendency(s, &u_hat, &v_hat);
        add_vertical_transport(s, params.u0, &mut dtheta, &mut deta);
        SpecTendency { theta: dtheta, eta: deta, max_speed }
    }
}

/// Frozen velocity supplied by the caller as a function of time (spectral
/// vorticity coefficients; the inversion runs per evaluation).
pub(crate) struct FrozenRhs<F: FnMut(f64) -> SpectralField> {
    pub omega_hat_at: F,
}

impl<F: FnMut(f64) -> SpectralField> RhsSpec for FrozenRhs<F> {
    fn eval(&mut self, s: &SpecState, t: f64, params: &ModelParams) -> SpecTendency {
        let omega_hat = (self.omega_hat_at)(t);
        let (u_hat, v_hat) = invert_vorticity_spectral(&omega_hat);
        let (mut dtheta, mut deta, max_speed) = advective_tendency(s, &u_hat, &v_hat);
        add_vertical_transport(s, params.u0, &mut dtheta, &mut deta);
        SpecTendency { theta: dtheta, eta: deta, max_speed }
    }
}

/// One classical RK4 step in spectral space. Returns the new state and the
/// max advection speed seen across the four stages.
pub(crate) fn rk4_step_spec<R: RhsSpec>(
    s: &SpecState,
    rhs: &mut R,
    t: f64,
    dt: f64,
    params: &ModelParams,
) -> (SpecState, f64) {
    let k1 = rhs.eval(s, t, params);
    let s2 = SpecState {
        theta: s.theta.add_scaled(0.5 * dt, &k1.theta),
        eta: s.eta.add_scaled(0.5 * dt, &k1.eta),
    };
    let k2 = rhs.eval(&s2, t + 0.5 * dt, params);
    let s3 = SpecState {
        theta: s.theta.add_scaled(0.5 * dt, &k2.theta),
        eta: s.eta.add_scaled(0.5 * dt, &k2.eta),
    };
    let k3 = rhs.eval(&s3, t + 0.5 * dt, params);
    let s4 = SpecState {
        theta: s.theta.add_scaled(dt, &k3.theta),
        eta: s.eta.add_scaled(dt, &k3.eta),
    };
    let k4 = rhs.eval(&s4, t + dt, params);

    let sixth = dt / 6.0;
    let theta = s
        .theta
        .add_scaled(sixth, &k1.theta)
        .add_scaled(2.0 * sixth, &k2.theta)
        .add_scaled(2.0 * sixth, &k3.theta)
        .add_scaled(sixth, &k4.theta);
    let eta = s
        .eta
        .add_scaled(sixth, &k1.eta)
        .add_scaled(2.0 * sixth, &k2.eta)
        .add_scaled(2.0 * sixth, &k3.eta)
        .add_scaled(sixth, &k4.eta);
    let speed = k1
        .max_speed
        .max(k2.max_speed)
        .max(k3.max_speed)
        .max(k4.max_speed);
    (SpecState { theta, eta }, speed)
}

/// Tendency of the nonlinear system at a state (physical in/out).
pub fn nonlinear_rhs(s: &ThetaEtaState, params: &ModelParams) -> Result<Tendency> {
    params.check_grid(s.grid())?;
    let spec = SpecState::of(s);
    let t = NonlinearRhs.eval(&spec, 0.0, params);
    let (dtheta_dt, deta_dt) = inverse_pair(&t.theta, &t.eta);
    Ok(Tendency { dtheta_dt, deta_dt })
}

/// Tendency of the linearized system: the supplied frozen velocity replaces
/// the self-consistent one.
pub fn linearized_rhs(
    s: &ThetaEtaState,
    frozen_vel: &crate::biot_savart::VelocityField,
    params: &ModelParams,
) -> Result<Tendency> {
    params.check_grid(s.grid())?;
    if frozen_vel.grid() != s.grid() {
        return Err(Error::GridMismatch("frozen velocity grid differs from state grid".into()));
    }
    let spec = SpecState::of(s);
    let (u_hat, v_hat) = forward_pair(&frozen_vel.u, &frozen_vel.v);
    let (mut dtheta, mut deta, _) = advective_tendency(&spec, &u_hat, &v_hat);
    add_vertical_transport(&spec, params.u0, &mut dtheta, &mut deta);
    let (dtheta_dt, deta_dt) = inverse_pair(&dtheta, &deta);
    Ok(Tendency { dtheta_dt, deta_dt })
}

/// One RK4 update with a caller-supplied tendency provider. The provider
/// receives each stage state together with the absolute stage time, so a
/// caller with a time-dependent frozen velocity can interpolate.
pub fn rk4_step<F>(s: &ThetaEtaState, rhs_provider: &mut F, t: f64, dt: f64) -> Result<ThetaEtaState>
where
    F: FnMut(&ThetaEtaState, f64) -> Result<Tendency>,
{
    let k1 = rhs_provider(s, t)?;
    let stage = |base: &ThetaEtaState, a: f64, k: &Tendency| ThetaEtaState {
        theta: base.theta.add_scaled(a, &k.dtheta_dt),
        eta: base.eta.add_scaled(a, &k.deta_dt),
    };
    let k2 = rhs_provider(&stage(s, 0.5 * dt, &k1), t + 0.5 * dt)?;
    let k3 = rhs_provider(&stage(s, 0.5 * dt, &k2), t + 0.5 * dt)?;
    let k4 = rhs_provider(&stage(s, dt, &k3), t + dt)?;
    let sixth = dt / 6.0;
    let theta = s
        .theta
        .add_scaled(sixth, &k1.dtheta_dt)
        .add_scaled(2.0 * sixth, &k2.dtheta_dt)
        .add_scaled(2.0 * sixth, &k3.dtheta_dt)
        .add_scaled(sixth, &k4.dtheta_dt);
    let eta = s
        .eta
        .add_scaled(sixth, &k1.deta_dt)
        .add_scaled(2.0 * sixth, &k2.deta_dt)
        .add_scaled(2.0 * sixth, &k3.deta_dt)
        .add_scaled(sixth, &k4.deta_dt);
    ThetaEtaState::new(theta, eta)
}

/// Spectral phase shift in z: coefficient at `k_z` multiplied by
/// `exp(i k_z delta)`. Exact for band-limited fields.
pub fn vertical_shift_exact(f: &ScalarField, delta: f64) -> ScalarField {
    let grid = *f.grid();
    let mut hat = transform_forward(f);
    for iz in 0..grid.nz {
        let k = grid.wavenumber(grid.nz, iz);
        let phase = rustfft::num_complex::Complex::new(0.0, k * delta).exp();
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let c = &mut hat.coeffs_mut()[grid.idx(iz, iy, ix)];
                *c *= phase;
            }
        }
    }
    transform_inverse(&hat)
}

const CFL_TINY: f64 = 1e-300;

/// `dt = safety * min(dx / max(|u|,|v|), dz / U0)`; +inf when both bounds
/// are vacuous.
pub fn cfl_dt(s: &ThetaEtaState, params: &ModelParams, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidParameter(format!("CFL safety must be in (0,1], got {safety}")));
    }
    params.check_grid(s.grid())?;
    let omega = crate::state::vorticity_of(s, params);
    let vel = crate::biot_savart::velocity_from_vorticity(&omega);
    Ok(safety * cfl_limit(s.grid(), params, vel.max_speed()))
}

fn cfl_limit(grid: &GridSpec, params: &ModelParams, max_speed: f64) -> f64 {
    if max_speed == 0.0 && params.u0 == 0.0 {
        return f64::INFINITY;
    }
    let dx = grid.dx().min(grid.dy());
    let horizontal = dx / max_speed.max(CFL_TINY);
    let vertical = grid.dz() / params.u0.max(CFL_TINY);
    horizontal.min(vertical)
}

/// What to do when a step exceeds the CFL bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CflPolicy {
    #[default]
    Warn,
    Error,
}

/// Stored time history of a run. `stride` nodes apart; node 0 and the final
/// node are always present.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub tg: TimeGrid,
    pub stride: usize,
    pub states: Vec<ThetaEtaState>,
}

impl Trajectory {
    /// Time of stored entry `i`.
    pub fn stored_time(&self, i: usize) -> f64 {
        self.tg.node_time(i * self.stride)
    }

    pub fn final_state(&self) -> &ThetaEtaState {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Knobs for [`advance`].
pub struct AdvanceOptions<'a> {
    /// Node stride between stored trajectory entries (`nsteps` must be a
    /// multiple). 0 means "store only the initial and final nodes".
    pub store_stride: usize,
    /// Step stride between diagnostics/hook invocations; 0 disables.
    pub diag_stride: usize,
    pub cfl_policy: CflPolicy,
    /// Called at diagnosed nodes: (step index, time, state, record).
    #[allow(clippy::type_complexity)]
    pub hook: Option<&'a mut dyn FnMut(usize, f64, &ThetaEtaState, &DiagnosticsRecord)>,
}

impl Default for AdvanceOptions<'_> {
    fn default() -> Self {
        AdvanceOptions { store_stride: 0, diag_stride: 0, cfl_policy: CflPolicy::Warn, hook: None }
    }
}

/// March the nonlinear system `nsteps` RK4 steps with self-consistent
/// velocity. Aborts on NaN, naming the first offending step; the CFL bound is
/// re-checked every step against the stage-max advection speed.
pub fn advance(
    s0: &ThetaEtaState,
    params: &ModelParams,
    tg: &TimeGrid,
    opts: &mut AdvanceOptions<'_>,
) -> Result<Trajectory> {
    params.check_grid(s0.grid())?;
    if !s0.is_finite() {
        return Err(Error::NumericalAbort { step: 0, t: tg.t0, what: "initial state is not finite".into() });
    }
    let stride = if opts.store_stride == 0 { tg.nsteps } else { opts.store_stride };
    if tg.nsteps % stride != 0 {
        return Err(Error::InvalidParameter(format!(
            "store stride {stride} does not divide nsteps {}",
            tg.nsteps
        )));
    }

    let mut tracker = ConservationTracker::new();
    let mut states = Vec::with_capacity(tg.nsteps / stride + 1);
    states.push(s0.clone());

    let mut spec = SpecState::of(s0);
    let mut rhs = NonlinearRhs;
    if let (Some(hook), true) = (opts.hook.as_deref_mut(), opts.diag_stride > 0) {
        let rec = tracker.record(tg.t0, s0, params)?;
        hook(0, tg.t0, s0, &rec);
    }

    let mut cfl_warned = false;
    for step in 0..tg.nsteps {
        let t = tg.node_time(step);
        let (next, max_speed) = rk4_step_spec(&spec, &mut rhs, t, tg.dt, params);
        spec = next;

        if !spec.is_finite() {
            return Err(Error::NumericalAbort {
                step: step + 1,
                t: tg.node_time(step + 1),
                what: "state became non-finite (NaN/Inf)".into(),
            });
        }

        let limit = cfl_limit(s0.grid(), params, max_speed);
        if tg.dt > limit {
            match opts.cfl_policy {
                CflPolicy::Error => {
                    return Err(Error::CflViolation { step: step + 1, dt: tg.dt, limit });
                }
                CflPolicy::Warn => {
                    if !cfl_warned {
                        eprintln!(
                            "warning: dt = {} exceeds CFL limit {} at step {}",
                            tg.dt,
                            limit,
                            step + 1
                        );
                        cfl_warned = true;
                    }
                }
            }
        }

        let node = step + 1;
        let need_store = node % stride == 0;
        let need_diag =
            opts.diag_stride > 0 && (node % opts.diag_stride == 0 || node == tg.nsteps);
        if need_store || need_diag {
            let phys = spec.to_physical();
            if need_diag {
                let rec = tracker.record(tg.node_time(node), &phys, params)?;
                if let Some(hook) = opts.hook.as_deref_mut() {
                    hook(node, tg.node_time(node), &phys, &rec);
                }
            }
            if need_store {
                states.push(phys);
            }
        }
    }

    Ok(Trajectory { tg: *tg, stride, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::lp_norm;
    use crate::grid::{horizontal_slice_mean, TWO_PI};
    use crate::state::tests::random_state;
    use crate::state::{make_initial, InitialKind};

    fn grid() -> GridSpec {
        GridSpec::new(1.0, 16, 16, 16).unwrap()
    }

    fn params() -> ModelParams {
        ModelParams::new(1.0, 1.0).unwrap()
    }

    fn l2_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        lp_norm(&a.add_scaled(-1.0, b), 2.0).unwrap()
    }

    #[test]
    fn zero_state_zero_tendency() {
        let s = ThetaEtaState::zeros(grid());
        let t = nonlinear_rhs(&s, &params()).unwrap();
        assert_eq!(t.dtheta_dt.max_abs(), 0.0);
        assert_eq!(t.deta_dt.max_abs(), 0.0);
    }

    #[test]
    fn pure_vertical_advection_tendency() {
        // theta = eta = f(z): u = 0, so d theta/dt = U0 f'(z) and
        // d eta/dt = -U0 f'(z).
        let g = grid();
        let p = ModelParams::new(1.0, 0.7).unwrap();
        let f = ScalarField::from_fn(g, |_, _, z| (TWO_PI * z / g.l).sin());
        let fprime =
            ScalarField::from_fn(g, |_, _, z| TWO_PI / g.l * (TWO_PI * z / g.l).cos());
        let s = ThetaEtaState::new(f.clone(), f).unwrap();
        let t = nonlinear_rhs(&s, &p).unwrap();
        let e1 = t
            .dtheta_dt
            .values()
            .iter()
            .zip(fprime.values())
            .map(|(a, b)| (a - p.u0 * b).abs())
            .fold(0.0, f64::max);
        let e2 = t
            .deta_dt
            .values()
            .iter()
            .zip(fprime.values())
            .map(|(a, b)| (a + p.u0 * b).abs())
            .fold(0.0, f64::max);
        assert!(e1 <= 1e-11 && e2 <= 1e-11);
    }

    #[test]
    fn eigen_steady_state_has_zero_tendency() {
        let g = grid();
        let p = params();
        let s = make_initial(&InitialKind::EigenSteady { amplitude: 1.0, mode: 2 }, g, &p, 0)
            .unwrap();
        let t = nonlinear_rhs(&s, &p).unwrap();
        let scale = s.theta.max_abs();
        assert!(t.dtheta_dt.max_abs() <= 1e-10 * scale);
        assert!(t.deta_dt.max_abs() <= 1e-10 * scale);

        // Physical-space evaluation of the advection product confirms the
        // cancellation independent of the tendency assembly.
        let omega = crate::state::vorticity_of(&s, &p);
        let vel = crate::biot_savart::velocity_from_vorticity(&omega);
        let (tx, ty) = crate::analysis::horizontal_gradient(&s.theta);
        let mut worst = 0.0f64;
        for i in 0..tx.values().len() {
            worst = worst.max(
                (vel.u.values()[i] * tx.values()[i] + vel.v.values()[i] * ty.values()[i]).abs(),
            );
        }
        assert!(worst <= 1e-10 * scale);
    }

    #[test]
    fn linearized_rhs_examples() {
        let g = grid();
        let p = params();
        let s = random_state(g, 4, 0.5, 3);

        // Frozen zero velocity: pure vertical transport.
        let t = linearized_rhs(&s, &crate::biot_savart::VelocityField::zeros(g), &p).unwrap();
        let hat = transform_forward(&s.theta);
        let tz = transform_inverse(&spectral_derivative(&hat, Axis::Z));
        let err = t
            .dtheta_dt
            .values()
            .iter()
            .zip(tz.values())
            .map(|(a, b)| (a - p.u0 * b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12);

        // Frozen self-consistent velocity reproduces the nonlinear tendency.
        let omega = crate::state::vorticity_of(&s, &p);
        let vel = crate::biot_savart::velocity_from_vorticity(&omega);
        let lin = linearized_rhs(&s, &vel, &p).unwrap();
        let non = nonlinear_rhs(&s, &p).unwrap();
        assert!(l2_diff(&lin.dtheta_dt, &non.dtheta_dt) <= 1e-13);
        assert!(l2_diff(&lin.deta_dt, &non.deta_dt) <= 1e-13);
    }

    #[test]
    fn linearized_rhs_is_linear_in_state() {
        let g = grid();
        let p = params();
        let s1 = random_state(g, 4, 0.5, 5);
        let s2 = random_state(g, 4, 0.5, 6);
        let vel = crate::biot_savart::velocity_from_vorticity(&random_state(g, 4, 0.5, 7).theta);
        let combo = ThetaEtaState::new(
            s1.theta.scaled(2.0).add_scaled(-1.5, &s2.theta),
            s1.eta.scaled(2.0).add_scaled(-1.5, &s2.eta),
        )
        .unwrap();
        let t_combo = linearized_rhs(&combo, &vel, &p).unwrap();
        let t1 = linearized_rhs(&s1, &vel, &p).unwrap();
        let t2 = linearized_rhs(&s2, &vel, &p).unwrap();
        let expect_t = t1.dtheta_dt.scaled(2.0).add_scaled(-1.5, &t2.dtheta_dt);
        let expect_e = t1.deta_dt.scaled(2.0).add_scaled(-1.5, &t2.deta_dt);
        let scale = t_combo.dtheta_dt.max_abs().max(1.0);
        assert!(l2_diff(&t_combo.dtheta_dt, &expect_t) <= 1e-12 * scale);
        assert!(l2_diff(&t_combo.deta_dt, &expect_e) <= 1e-12 * scale);
    }

    #[test]
    fn vertical_shift_examples() {
        let g = grid();
        let f = random_state(g, 5, 1.0, 9).theta;
        let same = vertical_shift_exact(&f, 0.0);
        assert!(l2_diff(&f, &same) < 1e-13);
        let period = vertical_shift_exact(&f, g.l);
        assert!(
            f.values()
                .iter()
                .zip(period.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                < 1e-13
        );

        let s = ScalarField::from_fn(g, |_, _, z| (TWO_PI * z / g.l).sin());
        let dz = g.dz();
        let shifted = vertical_shift_exact(&s, dz);
        let expect = ScalarField::from_fn(g, |_, _, z| (TWO_PI * (z + dz) / g.l).sin());
        assert!(
            shifted
                .values()
                .iter()
                .zip(expect.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                <= 1e-13
        );
    }

    #[test]
    fn cfl_examples() {
        let g = GridSpec::new(1.0, 32, 32, 32).unwrap();
        let zero = ThetaEtaState::zeros(g);
        let p0 = ModelParams::new(1.0, 0.0).unwrap();
        assert!(cfl_dt(&zero, &p0, 0.5).unwrap().is_infinite());

        let p1 = ModelParams::new(1.0, 1.0).unwrap();
        let dt = cfl_dt(&zero, &p1, 0.5).unwrap();
        assert!((dt - 0.5 / 32.0).abs() < 1e-15);

        let p2 = ModelParams::new(1.0, 2.0).unwrap();
        let dt2 = cfl_dt(&zero, &p2, 0.5).unwrap();
        assert!((dt2 - 0.25 / 32.0).abs() < 1e-15);

        assert!(cfl_dt(&zero, &p1, 0.0).is_err());
    }

    #[test]
    fn rk4_zero_state_stays_zero() {
        let s = ThetaEtaState::zeros(grid());
        let p = params();
        let mut rhs = |st: &ThetaEtaState, _t: f64| nonlinear_rhs(st, &p);
        let out = rk4_step(&s, &mut rhs, 0.0, 1e-2).unwrap();
        assert_eq!(out.theta.max_abs(), 0.0);
        assert_eq!(out.eta.max_abs(), 0.0);
    }

    #[test]
    fn rk4_order_on_vertical_wave() {
        // theta matches f(z + U0 t); halving dt cuts the error ~16x.
        let g = grid();
        let p = params();
        let s0 = make_initial(&InitialKind::VerticalWave { amplitude: 1.0, mode: 2 }, g, &p, 0)
            .unwrap();
        let t_end = 0.25;
        let mut errs = Vec::new();
        for nsteps in [16usize, 32, 64] {
            let tg = TimeGrid::new(0.0, t_end / nsteps as f64, nsteps).unwrap();
            let traj = advance(&s0, &p, &tg, &mut AdvanceOptions::default()).unwrap();
            let reference = vertical_shift_exact(&s0.theta, p.u0 * t_end);
            errs.push(l2_diff(&traj.final_state().theta, &reference));
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(order1 >= 3.7 && order2 >= 3.7, "orders {order1} {order2} from {errs:?}");
    }

    #[test]
    fn eigen_steady_is_preserved_over_100_steps() {
        let g = grid();
        let p = params();
        let s0 = make_initial(&InitialKind::EigenSteady { amplitude: 1.0, mode: 1 }, g, &p, 0)
            .unwrap();
        let tg = TimeGrid::new(0.0, 1e-2, 100).unwrap();
        let traj = advance(&s0, &p, &tg, &mut AdvanceOptions::default()).unwrap();
        let dev = l2_diff(&traj.final_state().theta, &s0.theta)
            + l2_diff(&traj.final_state().eta, &s0.eta);
        let norm = lp_norm(&s0.theta, 2.0).unwrap() + lp_norm(&s0.eta, 2.0).unwrap();
        assert!(dev <= 1e-8 * norm, "deviation {dev}");
    }

    #[test]
    fn advance_stores_initial_state_only_run() {
        let g = grid();
        let p = params();
        let s0 = random_state(g, 3, 0.2, 1);
        let tg = TimeGrid::new(0.0, 1e-3, 4).unwrap();
        let traj = advance(&s0, &p, &tg, &mut AdvanceOptions::default()).unwrap();
        assert_eq!(traj.states.len(), 2); // initial + final with stride 0
        assert!(TimeGrid::new(0.0, 1e-3, 0).is_err());
    }

    #[test]
    fn tendency_slice_means_vanish_without_vertical_term() {
        let g = grid();
        let p = ModelParams::new(1.0, 0.0).unwrap();
        let s = random_state(g, 5, 1.0, 13);
        let t = nonlinear_rhs(&s, &p).unwrap();
        let m1 = horizontal_slice_mean(&t.dtheta_dt);
        let m2 = horizontal_slice_mean(&t.deta_dt);
        let scale = t.dtheta_dt.max_abs().max(1e-30);
        assert!(m1.iter().chain(&m2).all(|m| m.abs() <= 1e-12 * scale.max(1.0)));
    }

    #[test]
    fn zero_mean_data_keeps_slice_means_small() {
        let g = grid();
        let p = params();
        let s0 = random_state(g, 4, 0.5, 17);
        let tg = TimeGrid::new(0.0, 2e-3, 50).unwrap();
        let traj = advance(&s0, &p, &tg, &mut AdvanceOptions::default()).unwrap();
        let m = horizontal_slice_mean(&traj.final_state().theta)
            .iter()
            .chain(&horizontal_slice_mean(&traj.final_state().eta))
            .fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(m <= 1e-11, "slice mean {m}");
    }

    #[test]
    fn mean_profile_advects_exactly() {
        let g = grid();
        let p = params();
        let s0 = make_initial(
            &InitialKind::MeanProfile {
                profile_amplitude: 0.5,
                profile_mode: 1,
                fluct_amplitude: 0.3,
                cutoff: 3,
            },
            g,
            &p,
            23,
        )
        .unwrap();
        let tg = TimeGrid::new(0.0, 1e-3, 100).unwrap();
        let traj = advance(&s0, &p, &tg, &mut AdvanceOptions::default()).unwrap();
        let profile0 = crate::grid::broadcast_profile(g, &horizontal_slice_mean(&s0.theta)).unwrap();
        let expect = vertical_shift_exact(&profile0, p.u0 * tg.t_end());
        let got = horizontal_slice_mean(&traj.final_state().theta);
        let want = horizontal_slice_mean(&expect);
        let err = got
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "mean advection error {err}");
    }

    #[test]
    fn nan_abort_names_the_step() {
        let g = grid();
        let p = params();
        let mut s0 = random_state(g, 3, 0.5, 2);
        s0.theta.values_mut()[0] = f64::NAN;
        let tg = TimeGrid::new(0.0, 1e-3, 2).unwrap();
        match advance(&s0, &p, &tg, &mut AdvanceOptions::default()) {
            Err(Error::NumericalAbort { step, .. }) => assert_eq!(step, 0),
            other => panic!("expected NaN abort, got {other:?}"),
        }
    }
}
