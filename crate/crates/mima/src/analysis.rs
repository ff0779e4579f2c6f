//! Grid-quadrature norms, the logarithmic/elliptic inequality checkers, and
//! the per-step diagnostics bundle.
//!
//! All L^p norms are collocation quadratures `(sum |f|^p * cell)^{1/p}`; pair
//! norms are sums `||a|| + ||b||`. Slice Sobolev norms use the scaling-weighted
//! convention `||f(z)||_{W^{1,p}}^p = L^{-p/2} * int |f|^p + int |grad_h f|^p`,
//! which reduces to `L^{-1} int f^2 + int |grad f|^2` at p = 2.
//!
//! The inequality operations return measured ratios with every unspecified
//! absolute constant set to 1; they are measurements to record and regress,
//! not assertions.

use crate::biot_savart::{velocity_from_vorticity, VelocityField};
use crate::error::{Error, Result};
use crate::grid::{
    horizontal_slice_mean, inverse_pair, spectral_derivative, transform_forward, Axis,
    ScalarField,
};
use crate::state::{to_w_omega, ModelParams, ThetaEtaState};

/// Finite ladder on which `sup_{q >= 2}` terms are evaluated; grid L^q norms
/// beyond 64 are numerically indistinguishable from the max norm at desk
/// resolutions.
pub const Q_LADDER: [f64; 11] = [2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0];

/// `(sum |f|^p dV)^{1/p}`; `p = inf` is the grid max.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("L^p norm needs p >= 1, got {p}")));
    }
    let dv = f.grid().cell_volume();
    let sum: f64 = f.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((sum * dv).powf(1.0 / p))
}

/// Pair norm `||a||_p + ||b||_p`.
pub fn pair_lp_norm(a: &ScalarField, b: &ScalarField, p: f64) -> Result<f64> {
    Ok(lp_norm(a, p)? + lp_norm(b, p)?)
}

/// Horizontal L^p norm of one z-slice by grid quadrature.
pub fn slice_lp_norm(f: &ScalarField, iz: usize, p: f64) -> f64 {
    let g = f.grid();
    let plane = g.nx * g.ny;
    let slice = &f.values()[iz * plane..(iz + 1) * plane];
    if p.is_infinite() {
        return slice.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    let sum: f64 = slice.iter().map(|v| v.abs().powf(p)).sum();
    (sum * g.cell_area_h()).powf(1.0 / p)
}

/// Horizontal L^p norm of the pointwise magnitude `sqrt(fx^2 + fy^2)` on one slice.
pub fn slice_lp_norm_vec2(fx: &ScalarField, fy: &ScalarField, iz: usize, p: f64) -> f64 {
    let g = fx.grid();
    let plane = g.nx * g.ny;
    let sx = &fx.values()[iz * plane..(iz + 1) * plane];
    let sy = &fy.values()[iz * plane..(iz + 1) * plane];
    if p.is_infinite() {
        return sx
            .iter()
            .zip(sy)
            .fold(0.0f64, |m, (a, b)| m.max((a * a + b * b).sqrt()));
    }
    let sum: f64 = sx
        .iter()
        .zip(sy)
        .map(|(a, b)| (a * a + b * b).sqrt().powf(p))
        .sum();
    (sum * g.cell_area_h()).powf(1.0 / p)
}

/// `max over z-slices of the slice L^4 norm` of a scalar field.
pub fn lzinf_lh4_norm(f: &ScalarField) -> f64 {
    (0..f.grid().nz)
        .map(|iz| slice_lp_norm(f, iz, 4.0))
        .fold(0.0, f64::max)
}

/// Same, for the magnitude of a two-component field (a horizontal gradient).
pub fn lzinf_lh4_norm_vec2(fx: &ScalarField, fy: &ScalarField) -> f64 {
    (0..fx.grid().nz)
        .map(|iz| slice_lp_norm_vec2(fx, fy, iz, 4.0))
        .fold(0.0, f64::max)
}

/// Horizontal gradient of a scalar field via spectral derivatives.
pub fn horizontal_gradient(f: &ScalarField) -> (ScalarField, ScalarField) {
    let hat = transform_forward(f);
    inverse_pair(
        &spectral_derivative(&hat, Axis::X),
        &spectral_derivative(&hat, Axis::Y),
    )
}

/// `||(grad_h theta, grad_h eta)||` in the `L_z^inf(L_h^4)` pair norm.
pub fn pair_grad_lzinf_lh4(state: &ThetaEtaState) -> f64 {
    let (tx, ty) = horizontal_gradient(&state.theta);
    let (ex, ey) = horizontal_gradient(&state.eta);
    lzinf_lh4_norm_vec2(&tx, &ty) + lzinf_lh4_norm_vec2(&ex, &ey)
}

/// Scaling-weighted slice Sobolev norm of a scalar slice:
/// `(L^{-p/2} sum |f|^p + sum |grad f|^p)^{1/p} * quadrature weights`.
pub fn slice_w1p_norm(
    f: &ScalarField,
    fx: &ScalarField,
    fy: &ScalarField,
    iz: usize,
    p: f64,
) -> f64 {
    let g = f.grid();
    let plane = g.nx * g.ny;
    let s = &f.values()[iz * plane..(iz + 1) * plane];
    let sx = &fx.values()[iz * plane..(iz + 1) * plane];
    let sy = &fy.values()[iz * plane..(iz + 1) * plane];
    let da = g.cell_area_h();
    let zero_order: f64 = s.iter().map(|v| v.abs().powf(p)).sum::<f64>() * da;
    let first_order: f64 = sx
        .iter()
        .zip(sy)
        .map(|(a, b)| (a * a + b * b).sqrt().powf(p))
        .sum::<f64>()
        * da;
    (g.l.powf(-p / 2.0) * zero_order + first_order).powf(1.0 / p)
}

/// Same weighting for a two-component slice field (velocity): zeroth order
/// uses the Euclidean magnitude, first order the Frobenius gradient norm.
pub fn slice_w1p_norm_vec2(vel: &VelocityGradient, iz: usize, p: f64) -> f64 {
    let g = vel.u.grid();
    let plane = g.nx * g.ny;
    let r = iz * plane..(iz + 1) * plane;
    let u = &vel.u.values()[r.clone()];
    let v = &vel.v.values()[r.clone()];
    let ux = &vel.ux.values()[r.clone()];
    let uy = &vel.uy.values()[r.clone()];
    let vx = &vel.vx.values()[r.clone()];
    let vy = &vel.vy.values()[r];
    let da = g.cell_area_h();
    let zero: f64 = u
        .iter()
        .zip(v)
        .map(|(a, b)| (a * a + b * b).sqrt().powf(p))
        .sum::<f64>()
        * da;
    let first: f64 = ux
        .iter()
        .zip(uy)
        .zip(vx.iter().zip(vy))
        .map(|((a, b), (c, d))| (a * a + b * b + c * c + d * d).sqrt().powf(p))
        .sum::<f64>()
        * da;
    (g.l.powf(-p / 2.0) * zero + first).powf(1.0 / p)
}

/// Velocity with its four horizontal derivatives.
pub struct VelocityGradient {
    pub u: ScalarField,
    pub v: ScalarField,
    pub ux: ScalarField,
    pub uy: ScalarField,
    pub vx: ScalarField,
    pub vy: ScalarField,
}

impl VelocityGradient {
    pub fn of(vel: &VelocityField) -> Self {
        let (uh, vh) = crate::grid::forward_pair(&vel.u, &vel.v);
        let (ux, uy) = inverse_pair(
            &spectral_derivative(&uh, Axis::X),
            &spectral_derivative(&uh, Axis::Y),
        );
        let (vx, vy) = inverse_pair(
            &spectral_derivative(&vh, Axis::X),
            &spectral_derivative(&vh, Axis::Y),
        );
        VelocityGradient {
            u: vel.u.clone(),
            v: vel.v.clone(),
            ux,
            uy,
            vx,
            vy,
        }
    }

    /// Grid max over the absolute values of all four derivative components.
    pub fn max_abs_grad(&self) -> f64 {
        self.ux
            .max_abs()
            .max(self.uy.max_abs())
            .max(self.vx.max_abs())
            .max(self.vy.max_abs())
    }
}

/// Sup-norm versus L^q-ladder logarithmic bound on a single slice, with the
/// absolute constant set to 1. Returns `(lhs, rhs)` where
/// `lhs = max |F|` and
/// `rhs = max{1, sup_q ||F||_q / (q^lambda L^{2/q})} * log^lambda(e^2 + L^{d/(2+d)} ||F||_{W^{1,2+d}})`.
pub fn log_inequality_ratio(
    f: &ScalarField,
    iz: usize,
    delta: f64,
    lambda: f64,
) -> Result<(f64, f64)> {
    if !(delta > 0.0) || !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "log inequality needs delta > 0 and lambda > 0, got {delta}, {lambda}"
        )));
    }
    let l = f.grid().l;
    let (fx, fy) = horizontal_gradient(f);
    let lhs = slice_lp_norm(f, iz, f64::INFINITY);
    let sup_q = Q_LADDER
        .iter()
        .map(|&q| slice_lp_norm(f, iz, q) / (q.powf(lambda) * l.powf(2.0 / q)))
        .fold(0.0, f64::max);
    let sobolev = slice_w1p_norm(f, &fx, &fy, iz, 2.0 + delta);
    let rhs = sup_q.max(1.0)
        * (std::f64::consts::E.powi(2) + l.powf(delta / (2.0 + delta)) * sobolev)
            .ln()
            .powf(lambda);
    Ok((lhs, rhs))
}

/// Measured ratio of the velocity-gradient sup bound with constants 1:
/// `||grad_h u||_inf / ((1/L) ||(theta,eta)||_inf log(e^2 + L^2 ||(grad theta, grad eta)||_{Lz^inf L^4} / ||(theta,eta)||_2))`.
pub fn grad_u_log_bound_ratio(state: &ThetaEtaState, params: &ModelParams) -> Result<f64> {
    let pair_inf = pair_lp_norm(&state.theta, &state.eta, f64::INFINITY)?;
    let pair_l2 = pair_lp_norm(&state.theta, &state.eta, 2.0)?;
    if pair_inf == 0.0 || pair_l2 == 0.0 {
        return Err(Error::ZeroField { context: "velocity-gradient bound ratio" });
    }
    let omega = state
        .theta
        .zip_map(&state.eta, |t, e| (t - e) / (2.0 * params.l));
    let vel = velocity_from_vorticity(&omega);
    let grads = VelocityGradient::of(&vel);
    let lhs = grads.max_abs_grad();
    let grad4 = pair_grad_lzinf_lh4(state);
    let l = params.l;
    let rhs = pair_inf / l * (std::f64::consts::E.powi(2) + l * l * grad4 / pair_l2).ln();
    Ok(lhs / rhs)
}

/// Per-slice interpolation ratio `||f||_4 / (||f||_2^{1/2} ||f||_{H^1}^{1/2})`.
pub fn ladyzhenskaya_ratio(f: &ScalarField, iz: usize) -> Result<f64> {
    let l4 = slice_lp_norm(f, iz, 4.0);
    let l2 = slice_lp_norm(f, iz, 2.0);
    if l2 == 0.0 {
        return Err(Error::ZeroField { context: "Ladyzhenskaya ratio" });
    }
    let (fx, fy) = horizontal_gradient(f);
    let h1 = slice_w1p_norm(f, &fx, &fy, iz, 2.0);
    Ok(l4 / (l2.sqrt() * h1.sqrt()))
}

/// Norms and drifts recorded per diagnostic step. Column order of the CSV
/// writer follows field order here.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l1_theta: f64,
    pub l2_theta: f64,
    pub l4_theta: f64,
    pub linf_theta: f64,
    pub l1_eta: f64,
    pub l2_eta: f64,
    pub l4_eta: f64,
    pub linf_eta: f64,
    pub lzinf_lh4_grad_theta: f64,
    pub lzinf_lh4_grad_eta: f64,
    pub dz_l2_theta: f64,
    pub dz_l2_eta: f64,
    pub linf_grad_u: f64,
    pub div_max: f64,
    pub slice_mean_max_theta: f64,
    pub slice_mean_max_eta: f64,
    /// `||w||_2^2 + L^2 ||omega||_2^2`.
    pub energy: f64,
    pub drift_l1_theta: f64,
    pub drift_l2_theta: f64,
    pub drift_l4_theta: f64,
    pub drift_linf_theta: f64,
    pub drift_l1_eta: f64,
    pub drift_l2_eta: f64,
    pub drift_l4_eta: f64,
    pub drift_linf_eta: f64,
    pub drift_energy: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str = "t,l1_theta,l2_theta,l4_theta,linf_theta,l1_eta,l2_eta,l4_eta,linf_eta,lzinf_lh4_grad_theta,lzinf_lh4_grad_eta,dz_l2_theta,dz_l2_eta,linf_grad_u,div_max,slice_mean_max_theta,slice_mean_max_eta,energy,drift_l1_theta,drift_l2_theta,drift_l4_theta,drift_linf_theta,drift_l1_eta,drift_l2_eta,drift_l4_eta,drift_linf_eta,drift_energy";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.t,
            self.l1_theta,
            self.l2_theta,
            self.l4_theta,
            self.linf_theta,
            self.l1_eta,
            self.l2_eta,
            self.l4_eta,
            self.linf_eta,
            self.lzinf_lh4_grad_theta,
            self.lzinf_lh4_grad_eta,
            self.dz_l2_theta,
            self.dz_l2_eta,
            self.linf_grad_u,
            self.div_max,
            self.slice_mean_max_theta,
            self.slice_mean_max_eta,
            self.energy,
            self.drift_l1_theta,
            self.drift_l2_theta,
            self.drift_l4_theta,
            self.drift_linf_theta,
            self.drift_l1_eta,
            self.drift_l2_eta,
            self.drift_l4_eta,
            self.drift_linf_eta,
            self.drift_energy,
        )
    }
}

/// Reference norms at t0 plus the running drift series.
#[derive(Debug, Default)]
pub struct ConservationTracker {
    reference: Option<RefNorms>,
    pub max_drift: DriftMaxima,
}

#[derive(Debug, Clone, Copy)]
struct RefNorms {
    l1_theta: f64,
    l2_theta: f64,
    l4_theta: f64,
    linf_theta: f64,
    l1_eta: f64,
    l2_eta: f64,
    l4_eta: f64,
    linf_eta: f64,
    energy: f64,
}

/// Running maxima of the relative drifts over a run.
#[derive(Debug, Default, Clone, Copy, serde::Serialize)]
pub struct DriftMaxima {
    pub l1_theta: f64,
    pub l2_theta: f64,
    pub l4_theta: f64,
    pub linf_theta: f64,
    pub l1_eta: f64,
    pub l2_eta: f64,
    pub l4_eta: f64,
    pub linf_eta: f64,
    pub energy: f64,
    /// Signed maximum of `max|theta(t)| - max|theta0|` relative to `max|theta0|`
    /// (transport overshoot; positive means the max norm grew).
    pub linf_overshoot_theta: f64,
    pub slice_mean_max: f64,
}

/// Relative drift `|n - n0| / n0`, absolute when the reference vanishes.
fn drift(n: f64, n0: f64) -> f64 {
    if n0 == 0.0 {
        n.abs()
    } else {
        (n - n0).abs() / n0
    }
}

impl ConservationTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Full diagnostics for one state; the first call fixes the reference.
    pub fn record(
        &mut self,
        t: f64,
        state: &ThetaEtaState,
        params: &ModelParams,
    ) -> Result<DiagnosticsRecord> {
        let th = &state.theta;
        let et = &state.eta;
        let l1_theta = lp_norm(th, 1.0)?;
        let l2_theta = lp_norm(th, 2.0)?;
        let l4_theta = lp_norm(th, 4.0)?;
        let linf_theta = th.max_abs();
        let l1_eta = lp_norm(et, 1.0)?;
        let l2_eta = lp_norm(et, 2.0)?;
        let l4_eta = lp_norm(et, 4.0)?;
        let linf_eta = et.max_abs();

        let (tx, ty) = horizontal_gradient(th);
        let (ex, ey) = horizontal_gradient(et);
        let lzinf_lh4_grad_theta = lzinf_lh4_norm_vec2(&tx, &ty);
        let lzinf_lh4_grad_eta = lzinf_lh4_norm_vec2(&ex, &ey);

        let th_hat = transform_forward(th);
        let et_hat = transform_forward(et);
        let (tz, ez) = inverse_pair(
            &spectral_derivative(&th_hat, Axis::Z),
            &spectral_derivative(&et_hat, Axis::Z),
        );
        let dz_l2_theta = lp_norm(&tz, 2.0)?;
        let dz_l2_eta = lp_norm(&ez, 2.0)?;

        let wo = to_w_omega(state, params)?;
        let energy = {
            let w2 = lp_norm(&wo.w, 2.0)?;
            let o2 = lp_norm(&wo.omega, 2.0)?;
            w2 * w2 + params.l * params.l * o2 * o2
        };

        let vel = velocity_from_vorticity(&wo.omega);
        let grads = VelocityGradient::of(&vel);
        let linf_grad_u = grads.max_abs_grad();
        let div = grads.ux.zip_map(&grads.vy, |a, b| a + b);
        let div_max = div.max_abs();

        let slice_mean_max_theta = horizontal_slice_mean(th)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let slice_mean_max_eta = horizontal_slice_mean(et)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));

        let r = *self.reference.get_or_insert(RefNorms {
            l1_theta,
            l2_theta,
            l4_theta,
            linf_theta,
            l1_eta,
            l2_eta,
            l4_eta,
            linf_eta,
            energy,
        });

        let rec = DiagnosticsRecord {
            t,
            l1_theta,
            l2_theta,
            l4_theta,
            linf_theta,
            l1_eta,
            l2_eta,
            l4_eta,
            linf_eta,
            lzinf_lh4_grad_theta,
            lzinf_lh4_grad_eta,
            dz_l2_theta,
            dz_l2_eta,
            linf_grad_u,
            div_max,
            slice_mean_max_theta,
            slice_mean_max_eta,
            energy,
            drift_l1_theta: drift(l1_theta, r.l1_theta),
            drift_l2_theta: drift(l2_theta, r.l2_theta),
            drift_l4_theta: drift(l4_theta, r.l4_theta),
            drift_linf_theta: drift(linf_theta, r.linf_theta),
            drift_l1_eta: drift(l1_eta, r.l1_eta),
            drift_l2_eta: drift(l2_eta, r.l2_eta),
            drift_l4_eta: drift(l4_eta, r.l4_eta),
            drift_linf_eta: drift(linf_eta, r.linf_eta),
            drift_energy: drift(energy, r.energy),
        };

        let m = &mut self.max_drift;
        m.l1_theta = m.l1_theta.max(rec.drift_l1_theta);
        m.l2_theta = m.l2_theta.max(rec.drift_l2_theta);
        m.l4_theta = m.l4_theta.max(rec.drift_l4_theta);
        m.linf_theta = m.linf_theta.max(rec.drift_linf_theta);
        m.l1_eta = m.l1_eta.max(rec.drift_l1_eta);
        m.l2_eta = m.l2_eta.max(rec.drift_l2_eta);
        m.l4_eta = m.l4_eta.max(rec.drift_l4_eta);
        m.linf_eta = m.linf_eta.max(rec.drift_linf_eta);
        m.energy = m.energy.max(rec.drift_energy);
        let overshoot = if r.linf_theta == 0.0 {
            linf_theta
        } else {
            (linf_theta - r.linf_theta) / r.linf_theta
        };
        m.linf_overshoot_theta = m.linf_overshoot_theta.max(overshoot);
        m.slice_mean_max = m
            .slice_mean_max
            .max(slice_mean_max_theta)
            .max(slice_mean_max_eta);

        Ok(rec)
    }
}
