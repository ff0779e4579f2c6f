//! Model parameters, the two equivalent state representations, the
//! initial-condition library, and the compactly supported mollifier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    broadcast_profile, transform_forward, transform_inverse, GridSpec, ScalarField, TWO_PI,
};

/// Box side and vertical wave speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub l: f64,
    pub u0: f64,
}

impl ModelParams {
    pub fn new(l: f64, u0: f64) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidParameter(format!("L must be positive, got {l}")));
        }
        if !(u0 >= 0.0) || !u0.is_finite() {
            return Err(Error::InvalidParameter(format!("U0 must be >= 0, got {u0}")));
        }
        Ok(ModelParams { l, u0 })
    }

    pub fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if self.l != grid.l {
            return Err(Error::GridMismatch(format!(
                "model L = {} differs from grid L = {}",
                self.l, grid.l
            )));
        }
        Ok(())
    }
}

/// Diagonalized transport variables `theta = w + L*omega`, `eta = w - L*omega`.
#[derive(Debug, Clone)]
pub struct ThetaEtaState {
    pub theta: ScalarField,
    pub eta: ScalarField,
}

impl ThetaEtaState {
    pub fn new(theta: ScalarField, eta: ScalarField) -> Result<Self> {
        if theta.grid() != eta.grid() {
            return Err(Error::GridMismatch("theta and eta grids differ".into()));
        }
        Ok(ThetaEtaState { theta, eta })
    }

    pub fn grid(&self) -> &GridSpec {
        self.theta.grid()
    }

    pub fn zeros(grid: GridSpec) -> Self {
        ThetaEtaState { theta: ScalarField::zeros(grid), eta: ScalarField::zeros(grid) }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.eta.is_finite()
    }
}

/// Vertical velocity and vertical vorticity.
#[derive(Debug, Clone)]
pub struct WOmegaState {
    pub w: ScalarField,
    pub omega: ScalarField,
}

impl WOmegaState {
    pub fn new(w: ScalarField, omega: ScalarField) -> Result<Self> {
        if w.grid() != omega.grid() {
            return Err(Error::GridMismatch("w and omega grids differ".into()));
        }
        Ok(WOmegaState { w, omega })
    }
}

/// `theta = w + L*omega`, `eta = w - L*omega`, pointwise.
pub fn to_theta_eta(s: &WOmegaState, p: &ModelParams) -> Result<ThetaEtaState> {
    p.check_grid(s.w.grid())?;
    let theta = s.w.zip_map(&s.omega, |w, o| w + p.l * o);
    let eta = s.w.zip_map(&s.omega, |w, o| w - p.l * o);
    ThetaEtaState::new(theta, eta)
}

/// `w = (theta + eta)/2`, `omega = (theta - eta)/(2L)`, pointwise.
pub fn to_w_omega(s: &ThetaEtaState, p: &ModelParams) -> Result<WOmegaState> {
    p.check_grid(s.grid())?;
    let w = s.theta.zip_map(&s.eta, |t, e| 0.5 * (t + e));
    let omega = s.theta.zip_map(&s.eta, |t, e| (t - e) / (2.0 * p.l));
    WOmegaState::new(w, omega)
}

/// Vorticity of a state without building the full `WOmegaState`.
pub fn vorticity_of(s: &ThetaEtaState, p: &ModelParams) -> ScalarField {
    s.theta.zip_map(&s.eta, |t, e| (t - e) / (2.0 * p.l))
}

/// Discrete product-form mollifier `rho(x,y,z) = zeta(x,y) * xi(z)` built from
/// the standard bump `exp(-1/(1-r^2))`, sampled on the grid and renormalized
/// to unit discrete mass per factor. Support radius is `epsilon` in each factor.
#[derive(Debug, Clone)]
pub struct Mollifier {
    pub epsilon: f64,
    grid: GridSpec,
    /// Horizontal weights, `(2*mh+1)^2` entries indexed `[dy][dx]`, sum 1.
    horiz: Vec<f64>,
    mh: usize,
    /// Vertical weights, `2*mv+1` entries, sum 1.
    vert: Vec<f64>,
    mv: usize,
}

fn bump(r: f64) -> f64 {
    if r.abs() < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

impl Mollifier {
    pub fn new(grid: GridSpec, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= grid.l / 4.0) {
            return Err(Error::InvalidParameter(format!(
                "mollifier epsilon must lie in (0, L/4], got {epsilon} with L = {}",
                grid.l
            )));
        }
        let (dx, dy, dz) = (grid.dx(), grid.dy(), grid.dz());
        let mh = ((epsilon / dx.min(dy)).ceil() as usize).max(1);
        let mut horiz = Vec::with_capacity((2 * mh + 1) * (2 * mh + 1));
        let mut hsum = 0.0;
        for j in -(mh as i64)..=(mh as i64) {
            for i in -(mh as i64)..=(mh as i64) {
                let r = ((i as f64 * dx).powi(2) + (j as f64 * dy).powi(2)).sqrt() / epsilon;
                let w = bump(r);
                hsum += w;
                horiz.push(w);
            }
        }
        if hsum == 0.0 {
            // Grid too coarse to resolve the bump: degenerate to the identity.
            horiz = vec![0.0; (2 * mh + 1) * (2 * mh + 1)];
            horiz[(2 * mh + 1) * mh + mh] = 1.0;
        } else {
            for w in &mut horiz {
                *w /= hsum;
            }
        }

        let mv = ((epsilon / dz).ceil() as usize).max(1);
        let mut vert = Vec::with_capacity(2 * mv + 1);
        let mut vsum = 0.0;
        for k in -(mv as i64)..=(mv as i64) {
            let w = bump(k as f64 * dz / epsilon);
            vsum += w;
            vert.push(w);
        }
        if vsum == 0.0 {
            vert = vec![0.0; 2 * mv + 1];
            vert[mv] = 1.0;
        } else {
            for w in &mut vert {
                *w /= vsum;
            }
        }

        Ok(Mollifier { epsilon, grid, horiz, mh, vert, mv })
    }

    pub fn horizontal_mass(&self) -> f64 {
        self.horiz.iter().sum()
    }

    pub fn vertical_mass(&self) -> f64 {
        self.vert.iter().sum()
    }
}

/// Periodic convolution with the discrete kernel. The weights of each factor
/// sum to one, so `||f * rho||_p <= ||f||_p` holds discretely for every p and
/// the global mean is preserved; the slice-mean profile convolves with the
/// vertical factor, so constant (in particular zero) profiles are preserved.
pub fn mollify(f: &ScalarField, m: &Mollifier) -> Result<ScalarField> {
    if f.grid() != &m.grid {
        return Err(Error::GridMismatch("mollifier built for a different grid".into()));
    }
    let g = *f.grid();
    let (nx, ny, nz) = (g.nx, g.ny, g.nz);

    // Vertical pass.
    let mut zpass = vec![0.0f64; g.len()];
    for iz in 0..nz {
        for (kk, &w) in m.vert.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let dz = kk as i64 - m.mv as i64;
            let jz = (iz as i64 - dz).rem_euclid(nz as i64) as usize;
            let src = &f.values()[g.idx(jz, 0, 0)..g.idx(jz, 0, 0) + ny * nx];
            let dst = &mut zpass[g.idx(iz, 0, 0)..g.idx(iz, 0, 0) + ny * nx];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }

    // Horizontal pass.
    let side = 2 * m.mh + 1;
    let mut out = vec![0.0f64; g.len()];
    for iz in 0..nz {
        let plane = &zpass[g.idx(iz, 0, 0)..g.idx(iz, 0, 0) + ny * nx];
        let dst = &mut out[g.idx(iz, 0, 0)..g.idx(iz, 0, 0) + ny * nx];
        for (jj, row) in m.horiz.chunks(side).enumerate() {
            let dyy = jj as i64 - m.mh as i64;
            for (ii, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let dxx = ii as i64 - m.mh as i64;
                for iy in 0..ny {
                    let jy = (iy as i64 - dyy).rem_euclid(ny as i64) as usize;
                    let drow = &mut dst[iy * nx..(iy + 1) * nx];
                    let srow = &plane[jy * nx..(jy + 1) * nx];
                    for ix in 0..nx {
                        let jx = (ix as i64 - dxx).rem_euclid(nx as i64) as usize;
                        drow[ix] += w * srow[jx];
                    }
                }
            }
        }
    }
    ScalarField::from_values(g, out)
}

/// Initial-condition kinds exposed through the config schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialKind {
    /// `w = 0`, `omega = A cos(2 pi k x / L)`: a horizontal-Laplacian
    /// eigenfunction transported by its own flow, hence an exact steady state.
    EigenSteady { amplitude: f64, mode: usize },
    /// `theta = eta = A sin(2 pi k z / L)`: no horizontal flow ever develops,
    /// so `w` evolves as the half-sum of two traveling profiles.
    VerticalWave { amplitude: f64, mode: usize },
    /// Seeded random modes with `|index| <= cutoff` on every axis; slice means
    /// of both fields forced to the configured profile (default zero). Scaled
    /// so the larger of the two grid maxima equals `amplitude`.
    RandomBandlimited {
        amplitude: f64,
        cutoff: usize,
        #[serde(default)]
        mean_profile: Option<ProfileSpec>,
    },
    /// Band-limited fluctuations plus a nonzero horizontal mean profile on
    /// theta; exercises exact advection of slice means.
    MeanProfile {
        profile_amplitude: f64,
        profile_mode: usize,
        fluct_amplitude: f64,
        cutoff: usize,
    },
}

/// A single-harmonic z-profile `A sin(2 pi k z / L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub amplitude: f64,
    pub mode: usize,
}

impl ProfileSpec {
    pub fn sample(&self, grid: &GridSpec) -> Vec<f64> {
        (0..grid.nz)
            .map(|iz| self.amplitude * (TWO_PI * self.mode as f64 * grid.z(iz) / grid.l).sin())
            .collect()
    }
}

impl InitialKind {
    pub fn needs_seed(&self) -> bool {
        matches!(
            self,
            InitialKind::RandomBandlimited { .. } | InitialKind::MeanProfile { .. }
        )
    }
}

/// Seeded random field, band-limited to `|index| <= cutoff` per axis, slice
/// means removed, scaled to the requested grid max.
fn random_bandlimited_field(
    grid: GridSpec,
    cutoff: usize,
    amplitude: f64,
    rng: &mut ChaCha8Rng,
) -> ScalarField {
    let raw = ScalarField::from_values(
        grid,
        (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .expect("sized buffer");
    let mut hat = transform_forward(&raw);
    // Nyquist bins are excluded along with everything above the cutoff; the
    // generated field is always a clean trigonometric polynomial.
    for iz in 0..grid.nz {
        let mz = GridSpec::mode_index(grid.nz, iz).unsigned_abs() as usize;
        for iy in 0..grid.ny {
            let my = GridSpec::mode_index(grid.ny, iy).unsigned_abs() as usize;
            for ix in 0..grid.nx {
                let mx = GridSpec::mode_index(grid.nx, ix).unsigned_abs() as usize;
                let keep = mx <= cutoff.min(grid.nx / 2 - 1)
                    && my <= cutoff.min(grid.ny / 2 - 1)
                    && mz <= cutoff.min(grid.nz / 2 - 1)
                    && !(mx == 0 && my == 0);
                if !keep {
                    hat.coeffs_mut()[grid.idx(iz, iy, ix)] =
                        rustfft::num_complex::Complex::new(0.0, 0.0);
                }
            }
        }
    }
    let f = transform_inverse(&hat);
    let m = f.max_abs();
    if m == 0.0 || amplitude == 0.0 {
        ScalarField::zeros(grid)
    } else {
        f.scaled(amplitude / m)
    }
}

/// Build initial data; deterministic in `(kind, grid, seed)`.
pub fn make_initial(
    kind: &InitialKind,
    grid: GridSpec,
    params: &ModelParams,
    seed: u64,
) -> Result<ThetaEtaState> {
    params.check_grid(&grid)?;
    match kind {
        InitialKind::EigenSteady { amplitude, mode } => {
            let a = *amplitude;
            let k = *mode as f64;
            let omega = ScalarField::from_fn(grid, |x, _, _| a * (TWO_PI * k * x / grid.l).cos());
            let w = ScalarField::zeros(grid);
            to_theta_eta(&WOmegaState::new(w, omega)?, params)
        }
        InitialKind::VerticalWave { amplitude, mode } => {
            let a = *amplitude;
            let k = *mode as f64;
            let f = ScalarField::from_fn(grid, |_, _, z| a * (TWO_PI * k * z / grid.l).sin());
            ThetaEtaState::new(f.clone(), f)
        }
        InitialKind::RandomBandlimited { amplitude, cutoff, mean_profile } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut theta = random_bandlimited_field(grid, *cutoff, *amplitude, &mut rng);
            let mut eta = random_bandlimited_field(grid, *cutoff, *amplitude, &mut rng);
            if let Some(p) = mean_profile {
                let prof = broadcast_profile(grid, &p.sample(&grid))?;
                theta = theta.add_scaled(1.0, &prof);
                eta = eta.add_scaled(1.0, &prof);
            }
            ThetaEtaState::new(theta, eta)
        }
        InitialKind::MeanProfile { profile_amplitude, profile_mode, fluct_amplitude, cutoff } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fl_t = random_bandlimited_field(grid, *cutoff, *fluct_amplitude, &mut rng);
            let fl_e = random_bandlimited_field(grid, *cutoff, *fluct_amplitude, &mut rng);
            let prof = ProfileSpec { amplitude: *profile_amplitude, mode: *profile_mode };
            let theta = fl_t.add_scaled(1.0, &broadcast_profile(grid, &prof.sample(&grid))?);
            ThetaEtaState::new(theta, fl_e)
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::analysis::{lp_norm, pair_lp_norm};
    use crate::grid::horizontal_slice_mean;

    pub(crate) fn random_state(grid: GridSpec, cutoff: usize, amp: f64, seed: u64) -> ThetaEtaState {
        make_initial(
            &InitialKind::RandomBandlimited { amplitude: amp, cutoff, mean_profile: None },
            grid,
            &ModelParams::new(grid.l, 1.0).unwrap(),
            seed,
        )
        .unwrap()
    }

    fn grid() -> GridSpec {
        GridSpec::new(1.0, 16, 16, 8).unwrap()
    }

    #[test]
    fn conversions_round_trip_exactly() {
        let g = grid();
        let p = ModelParams::new(g.l, 1.0).unwrap();
        let s = random_state(g, 5, 1.0, 12);
        let back = to_theta_eta(&to_w_omega(&s, &p).unwrap(), &p).unwrap();
        let e1 = s
            .theta
            .values()
            .iter()
            .zip(back.theta.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let e2 = s
            .eta
            .values()
            .iter()
            .zip(back.eta.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(e1 < 1e-15 && e2 < 1e-15);
    }

    #[test]
    fn conversion_examples() {
        let g = grid();
        let p = ModelParams::new(g.l, 0.5).unwrap();

        let zero = WOmegaState::new(ScalarField::zeros(g), ScalarField::zeros(g)).unwrap();
        let te = to_theta_eta(&zero, &p).unwrap();
        assert_eq!(te.theta.max_abs(), 0.0);
        assert_eq!(te.eta.max_abs(), 0.0);

        // (w, omega) = (f(z), 0) -> theta = eta = f(z).
        let f = ScalarField::from_fn(g, |_, _, z| z.cos());
        let s = WOmegaState::new(f.clone(), ScalarField::zeros(g)).unwrap();
        let te = to_theta_eta(&s, &p).unwrap();
        assert!(te.theta.values().iter().zip(f.values()).all(|(a, b)| a == b));
        assert!(te.eta.values().iter().zip(f.values()).all(|(a, b)| a == b));

        // (theta, eta) = (c, c) -> (w, omega) = (c, 0).
        let c = ScalarField::constant(g, 2.0);
        let wo = to_w_omega(&ThetaEtaState::new(c.clone(), c).unwrap(), &p).unwrap();
        assert!(wo.w.values().iter().all(|&v| v == 2.0));
        assert_eq!(wo.omega.max_abs(), 0.0);

        // (theta, eta) = (L g, -L g) -> (0, g).
        let gfun = ScalarField::from_fn(g, |x, y, _| (x + y).sin());
        let wo = to_w_omega(
            &ThetaEtaState::new(gfun.scaled(p.l), gfun.scaled(-p.l)).unwrap(),
            &p,
        )
        .unwrap();
        assert!(wo.w.max_abs() < 1e-15);
        let err = wo
            .omega
            .values()
            .iter()
            .zip(gfun.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-15);
    }

    #[test]
    fn norm_equivalence_sandwich() {
        let g = grid();
        let p = ModelParams::new(g.l, 1.0).unwrap();
        for seed in [1u64, 2, 3] {
            let s = random_state(g, 5, 2.0, seed);
            let wo = to_w_omega(&s, &p).unwrap();
            let lom = wo.omega.scaled(p.l);
            for q in [1.0, 2.0, f64::INFINITY] {
                let lower = pair_lp_norm(&wo.w, &lom, q).unwrap();
                let mid = pair_lp_norm(&s.theta, &s.eta, q).unwrap();
                assert!(lower <= mid * (1.0 + 1e-12) && mid <= 2.0 * lower * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn mollifier_validation_and_mass() {
        let g = grid();
        assert!(Mollifier::new(g, 0.0).is_err());
        assert!(Mollifier::new(g, g.l / 3.0).is_err());
        let m = Mollifier::new(g, g.l / 4.0).unwrap();
        assert!((m.horizontal_mass() - 1.0).abs() < 1e-12);
        assert!((m.vertical_mass() - 1.0).abs() < 1e-12);
        assert!(m.horiz.iter().all(|&w| w >= 0.0));
        assert!(m.vert.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn mollify_constant_and_contraction() {
        let g = grid();
        let m = Mollifier::new(g, g.l / 4.0).unwrap();
        let c = ScalarField::constant(g, 3.7);
        let mc = mollify(&c, &m).unwrap();
        assert!(mc.values().iter().all(|v| (v - 3.7).abs() < 1e-12));

        let f = random_state(g, 5, 1.0, 4).theta;
        for p in [1.0, 2.0, f64::INFINITY] {
            let before = lp_norm(&f, p).unwrap();
            let after = lp_norm(&mollify(&f, &m).unwrap(), p).unwrap();
            assert!(after <= before * (1.0 + 1e-12), "p = {p}");
        }
    }

    #[test]
    fn mollify_error_shrinks_with_epsilon() {
        let g = GridSpec::new(1.0, 16, 16, 16).unwrap();
        let f = ScalarField::from_fn(g, |x, y, z| {
            (TWO_PI * x).sin() + (TWO_PI * y).cos() * (TWO_PI * z).sin()
        });
        let mut errs = Vec::new();
        for div in [4.0, 8.0, 16.0] {
            let m = Mollifier::new(g, g.l / div).unwrap();
            let diff = mollify(&f, &m).unwrap().add_scaled(-1.0, &f);
            errs.push(lp_norm(&diff, 2.0).unwrap());
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "errors {errs:?}");
    }

    #[test]
    fn mollify_preserves_global_mean_and_zero_slice_means() {
        let g = grid();
        let m = Mollifier::new(g, g.l / 8.0).unwrap();
        let f = random_state(g, 5, 1.0, 6).theta;
        let mean_before: f64 = f.values().iter().sum::<f64>() / g.len() as f64;
        let out = mollify(&f, &m).unwrap();
        let mean_after: f64 = out.values().iter().sum::<f64>() / g.len() as f64;
        assert!((mean_before - mean_after).abs() < 1e-12);
        // The input has mean-free slices; they must stay mean-free.
        assert!(horizontal_slice_mean(&out).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn mollify_commutes_with_grid_translation() {
        let g = grid();
        let m = Mollifier::new(g, g.l / 8.0).unwrap();
        let f = random_state(g, 5, 1.0, 8).theta;
        let shift = |f: &ScalarField| {
            let mut out = ScalarField::zeros(g);
            for iz in 0..g.nz {
                for iy in 0..g.ny {
                    for ix in 0..g.nx {
                        let v = f.at(iz, iy, (ix + 1) % g.nx);
                        out.values_mut()[g.idx(iz, iy, ix)] = v;
                    }
                }
            }
            out
        };
        let a = mollify(&shift(&f), &m).unwrap();
        let b = shift(&mollify(&f, &m).unwrap());
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x == y));
    }

    #[test]
    fn mollify_is_linear_and_positivity_preserving() {
        let g = grid();
        let m = Mollifier::new(g, g.l / 8.0).unwrap();
        let a = random_state(g, 4, 1.0, 10).theta;
        let b = random_state(g, 4, 1.0, 11).theta;
        let lhs = mollify(&a.scaled(2.0).add_scaled(3.0, &b), &m).unwrap();
        let rhs = mollify(&a, &m)
            .unwrap()
            .scaled(2.0)
            .add_scaled(3.0, &mollify(&b, &m).unwrap());
        let err = lhs
            .values()
            .iter()
            .zip(rhs.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);

        let pos = ScalarField::from_fn(g, |x, _, _| 1.0 + 0.9 * (TWO_PI * x).sin());
        assert!(mollify(&pos, &m).unwrap().values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn make_initial_examples() {
        let g = grid();
        let p = ModelParams::new(g.l, 1.0).unwrap();

        let zero = make_initial(&InitialKind::EigenSteady { amplitude: 0.0, mode: 1 }, g, &p, 0)
            .unwrap();
        assert_eq!(zero.theta.max_abs(), 0.0);
        assert_eq!(zero.eta.max_abs(), 0.0);

        let kind = InitialKind::RandomBandlimited { amplitude: 1.0, cutoff: 4, mean_profile: None };
        let a = make_initial(&kind, g, &p, 42).unwrap();
        let b = make_initial(&kind, g, &p, 42).unwrap();
        assert!(a.theta.values().iter().zip(b.theta.values()).all(|(x, y)| x == y));
        assert!(a.eta.values().iter().zip(b.eta.values()).all(|(x, y)| x == y));
        // Slice means forced to zero, amplitude respected.
        assert!(horizontal_slice_mean(&a.theta).iter().all(|v| v.abs() < 1e-12));
        assert!((a.theta.max_abs().max(a.eta.max_abs()) - 1.0).abs() < 1e-12);

        let vw = make_initial(&InitialKind::VerticalWave { amplitude: 1.0, mode: 1 }, g, &p, 0)
            .unwrap();
        let wo = to_w_omega(&vw, &p).unwrap();
        assert!(wo.omega.max_abs() < 1e-15);

        let unknown_grid = GridSpec::new(2.0, 16, 16, 8).unwrap();
        assert!(make_initial(&kind, unknown_grid, &p, 1).is_err());
    }
}
