//! Self-check property suite behind `verify`: conversions, Biot-Savart
//! identities, conservation runs, inequality-ratio regressions, mollifier
//! properties, and the temporal convergence-order measurement. Each property
//! reports a measured value against a pinned threshold; the command exits
//! nonzero when any assertable property fails.

use serde::Serialize;

use crate::analysis::{
    ladyzhenskaya_ratio, log_inequality_ratio, lp_norm, pair_lp_norm, DiagnosticsRecord,
};
use crate::biot_savart::{
    curl_h, elliptic_ratio_report, plancherel_identity_check, relative_divergence,
    velocity_from_vorticity,
};
use crate::commands::distance_to_nonlinear;
use crate::config::RunConfig;
use crate::dynamics::{advance, vertical_shift_exact, AdvanceOptions, TimeGrid};
use crate::error::Result;
use crate::grid::{
    dealias_23, horizontal_slice_mean, remove_horizontal_slice_mean, transform_forward,
    transform_inverse, GridSpec, ScalarField, TWO_PI,
};
use crate::picard::picard_solve;
use crate::state::{
    make_initial, mollify, to_theta_eta, to_w_omega, InitialKind, ModelParams, Mollifier,
    ThetaEtaState,
};

/// One property outcome. `measured` is compared against `threshold` with the
/// direction given by `kind`.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl PropertyResult {
    fn upper(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        PropertyResult {
            name: name.into(),
            pass: measured <= threshold,
            measured,
            threshold,
            detail: detail.into(),
        }
    }

    fn lower(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        PropertyResult {
            name: name.into(),
            pass: measured >= threshold,
            measured,
            threshold,
            detail: detail.into(),
        }
    }

    fn flag(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        PropertyResult {
            name: name.into(),
            pass,
            measured: if pass { 1.0 } else { 0.0 },
            threshold: 1.0,
            detail: detail.into(),
        }
    }
}

/// Scale at which the self-check runs; small enough to finish in seconds.
pub struct VerifyScale {
    pub grid: GridSpec,
    pub params: ModelParams,
    pub seed: u64,
}

impl Default for VerifyScale {
    fn default() -> Self {
        VerifyScale {
            grid: GridSpec::new(1.0, 32, 32, 16).expect("valid"),
            params: ModelParams::new(1.0, 1.0).expect("valid"),
            seed: 7,
        }
    }
}

impl VerifyScale {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        Ok(VerifyScale {
            grid: cfg.grid_spec()?,
            params: cfg.model_params()?,
            seed: cfg.seed(),
        })
    }
}

fn random_state(scale: &VerifyScale, cutoff: usize, amp: f64, salt: u64) -> ThetaEtaState {
    make_initial(
        &InitialKind::RandomBandlimited { amplitude: amp, cutoff, mean_profile: None },
        scale.grid,
        &scale.params,
        scale.seed.wrapping_add(salt),
    )
    .expect("valid initial kind")
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Run every property; deterministic in the scale and seed.
pub fn run_all(scale: &VerifyScale) -> Vec<PropertyResult> {
    let mut out = Vec::new();
    let g = scale.grid;
    let p = scale.params;

    // Spectral substrate.
    {
        let f = random_state(scale, 5, 1.0, 1).theta;
        let back = transform_inverse(&transform_forward(&f));
        out.push(PropertyResult::upper(
            "fft_round_trip",
            max_diff(&f, &back) / f.max_abs().max(1e-300),
            1e-13,
            "relative max error of inverse(forward(f))",
        ));

        let phys: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        let hat = transform_forward(&f);
        let spec: f64 = g.l.powi(3) * hat.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
        out.push(PropertyResult::upper(
            "parseval",
            (phys - spec).abs() / phys,
            1e-12,
            "physical vs spectral energy",
        ));

        let s = ScalarField::from_fn(g, |x, _, _| (TWO_PI * x / g.l).sin());
        let d = transform_inverse(&crate::grid::spectral_derivative(
            &transform_forward(&s),
            crate::grid::Axis::X,
        ));
        let expect =
            ScalarField::from_fn(g, |x, _, _| TWO_PI / g.l * (TWO_PI * x / g.l).cos());
        out.push(PropertyResult::upper(
            "spectral_derivative_exact",
            max_diff(&d, &expect),
            1e-12,
            "d/dx sin(2 pi x / L) against the analytic derivative",
        ));

        let hat = transform_forward(&f);
        let once = dealias_23(&hat);
        let twice = dealias_23(&once);
        let idem = once
            .coeffs()
            .iter()
            .zip(twice.coeffs())
            .all(|(a, b)| a.re == b.re && a.im == b.im);
        out.push(PropertyResult::flag("dealias_idempotent", idem, "dealias applied twice"));

        let nf = remove_horizontal_slice_mean(&f.add_scaled(
            1.0,
            &ScalarField::from_fn(g, |_, _, z| 0.5 + z),
        ));
        let worst = horizontal_slice_mean(&nf).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        out.push(PropertyResult::upper(
            "slice_mean_projection",
            worst,
            1e-14,
            "slice means after projection",
        ));
    }

    // State algebra and mollifier.
    {
        let s = random_state(scale, 5, 1.0, 2);
        let back = to_theta_eta(&to_w_omega(&s, &p).expect("grids match"), &p).expect("grids");
        out.push(PropertyResult::upper(
            "conversion_round_trip",
            max_diff(&s.theta, &back.theta).max(max_diff(&s.eta, &back.eta)),
            1e-15,
            "theta/eta -> w/omega -> theta/eta",
        ));

        let wo = to_w_omega(&s, &p).expect("grids");
        let lom = wo.omega.scaled(p.l);
        let mut sandwich_ok = true;
        for q in [1.0, 2.0, f64::INFINITY] {
            let lower = pair_lp_norm(&wo.w, &lom, q).expect("norm");
            let mid = pair_lp_norm(&s.theta, &s.eta, q).expect("norm");
            sandwich_ok &= lower <= mid * (1.0 + 1e-12) && mid <= 2.0 * lower * (1.0 + 1e-12);
        }
        out.push(PropertyResult::flag(
            "pair_norm_sandwich",
            sandwich_ok,
            "||(w, L om)|| <= ||(th, et)|| <= 2 ||(w, L om)|| in L1, L2, Linf",
        ));

        let m = Mollifier::new(g, g.l / 4.0).expect("valid epsilon");
        out.push(PropertyResult::upper(
            "mollifier_unit_mass",
            (m.horizontal_mass() - 1.0).abs().max((m.vertical_mass() - 1.0).abs()),
            1e-12,
            "discrete kernel mass per factor",
        ));

        let f = random_state(scale, 6, 1.0, 3).theta;
        let mut young_worst = 0.0f64;
        for q in [1.0, 2.0, f64::INFINITY] {
            let before = lp_norm(&f, q).expect("norm");
            let after = lp_norm(&mollify(&f, &m).expect("grid"), q).expect("norm");
            young_worst = young_worst.max((after - before) / before);
        }
        out.push(PropertyResult::upper(
            "mollifier_contraction",
            young_worst,
            1e-12,
            "(||f*rho||_p - ||f||_p)/||f||_p for p in {1,2,inf}",
        ));

        let smooth = ScalarField::from_fn(g, |x, y, z| {
            (TWO_PI * x / g.l).sin() + (TWO_PI * y / g.l).cos() * (TWO_PI * z / g.l).sin()
        });
        let mut errs = Vec::new();
        for div in [4.0, 8.0, 16.0] {
            let m = Mollifier::new(g, g.l / div).expect("valid epsilon");
            let diff = mollify(&smooth, &m).expect("grid").add_scaled(-1.0, &smooth);
            errs.push(lp_norm(&diff, 2.0).expect("norm"));
        }
        out.push(PropertyResult::flag(
            "mollifier_refinement",
            errs[0] > errs[1] && errs[1] > errs[2],
            format!("||f*rho_eps - f||_2 along eps = L/4, L/8, L/16: {errs:?}"),
        ));
    }

    // Biot-Savart identities.
    {
        let a = 1.3;
        let omega = ScalarField::from_fn(g, |x, _, _| a * (TWO_PI * x / g.l).sin());
        let vel = velocity_from_vorticity(&omega);
        let v_expect =
            ScalarField::from_fn(g, |x, _, _| -a * g.l / TWO_PI * (TWO_PI * x / g.l).cos());
        out.push(PropertyResult::upper(
            "biot_savart_single_mode",
            vel.u.max_abs().max(max_diff(&vel.v, &v_expect)),
            1e-12,
            "one-harmonic inversion against the analytic velocity",
        ));

        let omega = random_state(scale, 6, 1.0, 4).theta;
        let vel = velocity_from_vorticity(&omega);
        out.push(PropertyResult::upper(
            "velocity_divergence_free",
            relative_divergence(&vel),
            1e-11,
            "max |du/dx + dv/dy| relative to the velocity scale",
        ));

        let back = curl_h(&vel);
        let expect = remove_horizontal_slice_mean(&omega);
        out.push(PropertyResult::upper(
            "curl_round_trip",
            max_diff(&back, &expect) / expect.max_abs(),
            1e-11,
            "curl(velocity(omega)) against the mean-free omega",
        ));

        out.push(PropertyResult::upper(
            "plancherel_identity",
            plancherel_identity_check(&omega),
            1e-11,
            "per-slice |  ||om||_2 - ||grad u||_2 | / ||om||_2",
        ));

        let r = elliptic_ratio_report(&omega, 2.0).expect("nonzero");
        let rs = elliptic_ratio_report(&omega.scaled(10.0), 2.0).expect("nonzero");
        out.push(PropertyResult::upper(
            "elliptic_ratio_scale_invariant",
            (r - rs).abs() / r,
            1e-12,
            format!("p=2 ratio {r}; unchanged under omega -> 10 omega"),
        ));
    }

    // Inequality ratio measurements: finiteness and scaling behavior.
    {
        let s = random_state(scale, 5, 1.0, 5);
        let lad = ladyzhenskaya_ratio(&s.theta, g.nz / 2).expect("nonzero");
        let lad_s = ladyzhenskaya_ratio(&s.theta.scaled(37.0), g.nz / 2).expect("nonzero");
        out.push(PropertyResult::upper(
            "ladyzhenskaya_scale_invariant",
            (lad - lad_s).abs(),
            1e-12,
            format!("slice ratio {lad}; degree-zero homogeneity"),
        ));

        let big = s.theta.scaled(30.0);
        let (l1, r1) = log_inequality_ratio(&big, g.nz / 2, 2.0, 1.0).expect("valid");
        let (l2, r2) = log_inequality_ratio(&big.scaled(10.0), g.nz / 2, 2.0, 1.0).expect("valid");
        out.push(PropertyResult::flag(
            "log_inequality_scaling",
            l2 / r2 <= l1 / r1 + 1e-12 && (l1 / r1).is_finite(),
            format!("ratio {} -> {} under F -> 10F", l1 / r1, l2 / r2),
        ));

        let gr = crate::analysis::grad_u_log_bound_ratio(&s, &p).expect("nonzero");
        let s8 = ThetaEtaState::new(s.theta.scaled(8.0), s.eta.scaled(8.0)).expect("grids");
        let gr8 = crate::analysis::grad_u_log_bound_ratio(&s8, &p).expect("nonzero");
        out.push(PropertyResult::upper(
            "grad_u_bound_scale_invariant",
            (gr - gr8).abs() / gr,
            1e-10,
            format!("velocity-gradient bound ratio {gr}"),
        ));
    }

    // Dynamics: steady state, conservation, mean transport, convergence order.
    {
        let steady =
            make_initial(&InitialKind::EigenSteady { amplitude: 1.0, mode: 2 }, g, &p, 0)
                .expect("valid kind");
        let tg = TimeGrid::new(0.0, 2e-3, 100).expect("valid");
        let traj = advance(&steady, &p, &tg, &mut AdvanceOptions::default()).expect("stable");
        let dev = pair_lp_norm(
            &traj.final_state().theta.add_scaled(-1.0, &steady.theta),
            &traj.final_state().eta.add_scaled(-1.0, &steady.eta),
            2.0,
        )
        .expect("norm")
            / pair_lp_norm(&steady.theta, &steady.eta, 2.0).expect("norm");
        out.push(PropertyResult::upper(
            "steady_state_preserved",
            dev,
            1e-8,
            "eigenfunction state after 100 steps",
        ));

        // Cutoff 2 keeps the cascade comfortably inside the truncation band
        // at this resolution, so the non-quadratic norms are probed at the
        // same truncation-to-band ratio the production scale enjoys.
        let s0 = random_state(scale, 2, 0.3, 6);
        let mut maxima = crate::analysis::DriftMaxima::default();
        let mut hook = |_n: usize, _t: f64, _s: &ThetaEtaState, rec: &DiagnosticsRecord| {
            maxima.l2_theta = maxima.l2_theta.max(rec.drift_l2_theta);
            maxima.l1_theta = maxima.l1_theta.max(rec.drift_l1_theta);
            maxima.l4_theta = maxima.l4_theta.max(rec.drift_l4_theta);
            maxima.energy = maxima.energy.max(rec.drift_energy);
            maxima.slice_mean_max = maxima
                .slice_mean_max
                .max(rec.slice_mean_max_theta)
                .max(rec.slice_mean_max_eta);
            let over = rec.linf_theta;
            maxima.linf_overshoot_theta = maxima.linf_overshoot_theta.max(over);
        };
        let tg = TimeGrid::new(0.0, 2e-3, 100).expect("valid");
        let mut opts = AdvanceOptions {
            store_stride: 0,
            diag_stride: 10,
            cfl_policy: crate::dynamics::CflPolicy::Warn,
            hook: Some(&mut hook),
        };
        let traj = advance(&s0, &p, &tg, &mut opts).expect("stable");
        drop(opts);
        let linf0 = s0.theta.max_abs();
        out.push(PropertyResult::upper(
            "conservation_l2",
            maxima.l2_theta,
            1e-7,
            "relative drift of ||theta||_2 over a smooth random run",
        ));
        out.push(PropertyResult::upper(
            "conservation_energy",
            maxima.energy,
            1e-7,
            "relative drift of ||w||_2^2 + L^2 ||omega||_2^2",
        ));
        out.push(PropertyResult::upper(
            "conservation_l1_l4",
            maxima.l1_theta.max(maxima.l4_theta),
            1e-6,
            "relative drift of ||theta||_1 and ||theta||_4",
        ));
        out.push(PropertyResult::upper(
            "linf_overshoot",
            (maxima.linf_overshoot_theta - linf0) / linf0,
            1e-4,
            "max-norm overshoot relative to the initial max",
        ));
        out.push(PropertyResult::upper(
            "slice_means_stay_zero",
            maxima.slice_mean_max,
            1e-11,
            "max |slice mean| over the run for zero-mean data",
        ));
        let _ = traj;

        // Aliasing guard: near-full-band data drifts only at the integrator
        // level when products are dealiased; without dealiasing the aliased
        // products break the conservation law within a few steps.
        let full = random_state(scale, g.nx / 2 - 2, 1.0, 7);
        let tg = TimeGrid::new(0.0, 1e-3, 25).expect("valid");
        let traj = advance(&full, &p, &tg, &mut AdvanceOptions::default());
        let guard = match traj {
            Ok(traj) => {
                let n0 = lp_norm(&full.theta, 2.0).expect("norm");
                let n1 = lp_norm(&traj.final_state().theta, 2.0).expect("norm");
                (n1 - n0).abs() / n0
            }
            Err(_) => f64::INFINITY,
        };
        out.push(PropertyResult::upper(
            "conservation_aliasing_guard",
            guard,
            1e-5,
            "L2 drift on near-full-band data (sensitive to dealiasing)",
        ));

        // Mean advection against the spectral shift reference.
        let s0 = make_initial(
            &InitialKind::MeanProfile {
                profile_amplitude: 0.5,
                profile_mode: 1,
                fluct_amplitude: 0.3,
                cutoff: 3,
            },
            g,
            &p,
            scale.seed.wrapping_add(8),
        )
        .expect("valid kind");
        let tg = TimeGrid::new(0.0, 1e-3, 200).expect("valid");
        let traj = advance(&s0, &p, &tg, &mut AdvanceOptions::default()).expect("stable");
        let profile0 =
            crate::grid::broadcast_profile(g, &horizontal_slice_mean(&s0.theta)).expect("nz");
        let expect = vertical_shift_exact(&profile0, p.u0 * tg.t_end());
        let got = horizontal_slice_mean(&traj.final_state().theta);
        let want = horizontal_slice_mean(&expect);
        let err = got
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        out.push(PropertyResult::upper(
            "mean_profile_advection",
            err,
            1e-10,
            "slice-mean profile against the shifted initial profile",
        ));

        // Temporal order on the exact vertical-wave solution.
        let wave = make_initial(&InitialKind::VerticalWave { amplitude: 1.0, mode: 1 }, g, &p, 0)
            .expect("valid kind");
        let t_end = 0.2;
        let mut errs = Vec::new();
        for nsteps in [50usize, 100, 200] {
            let tg = TimeGrid::new(0.0, t_end / nsteps as f64, nsteps).expect("valid");
            let traj = advance(&wave, &p, &tg, &mut AdvanceOptions::default()).expect("stable");
            let reference = vertical_shift_exact(&wave.theta, p.u0 * t_end);
            errs.push(
                lp_norm(&traj.final_state().theta.add_scaled(-1.0, &reference), 2.0)
                    .expect("norm"),
            );
        }
        let order = (errs[0] / errs[2]).log2() / 2.0;
        out.push(PropertyResult::lower(
            "rk4_temporal_order",
            order,
            3.7,
            format!("measured order from errors {errs:?}"),
        ));
    }

    // Linearized-vs-nonlinear agreement at the self-consistent velocity.
    {
        let s = random_state(scale, 4, 0.5, 9);
        let omega = crate::state::vorticity_of(&s, &p);
        let vel = velocity_from_vorticity(&omega);
        let lin = crate::dynamics::linearized_rhs(&s, &vel, &p).expect("grids");
        let non = crate::dynamics::nonlinear_rhs(&s, &p).expect("grids");
        out.push(PropertyResult::upper(
            "linearized_matches_nonlinear",
            max_diff(&lin.dtheta_dt, &non.dtheta_dt).max(max_diff(&lin.deta_dt, &non.deta_dt)),
            1e-13,
            "frozen self-consistent velocity reproduces the nonlinear tendency",
        ));
    }

    // Fixed-point construction and uniqueness.
    {
        let s0 = random_state(scale, 3, 0.3, 10);
        let tg = TimeGrid::new(0.0, 2e-3, 50).expect("valid");
        match picard_solve(&s0, &p, &tg, 20, 1e-10) {
            Ok((traj, report)) => {
                let monotone = report.residuals[1..].windows(2).all(|w| w[1] <= w[0]);
                out.push(PropertyResult::flag(
                    "picard_converged_monotone",
                    report.converged && monotone,
                    format!("residuals {:?}", report.residuals),
                ));
                let dist = distance_to_nonlinear(&s0, &p, &tg, &traj).expect("comparable");
                out.push(PropertyResult::upper(
                    "picard_matches_nonlinear",
                    dist,
                    1e-6,
                    "sup-in-time pair-L2 distance between fixed point and direct solve",
                ));
            }
            Err(e) => {
                out.push(PropertyResult::flag("picard_converged_monotone", false, e.to_string()));
                out.push(PropertyResult::flag("picard_matches_nonlinear", false, "solver failed"));
            }
        }

        // Continuous dependence: halving the perturbation halves the distance.
        let base = random_state(scale, 3, 0.3, 11);
        let dir = perturbation_direction(scale);
        let tg = TimeGrid::new(0.0, 2e-3, 100).expect("valid");
        let dist = |delta: f64| -> f64 {
            let pert = ThetaEtaState::new(
                base.theta.add_scaled(delta, &dir),
                base.eta.clone(),
            )
            .expect("grids");
            let t1 = advance(&base, &p, &tg, &mut AdvanceOptions::default()).expect("stable");
            let t2 = advance(&pert, &p, &tg, &mut AdvanceOptions::default()).expect("stable");
            crate::picard::pair_l2_distance(t1.final_state(), t2.final_state()).expect("grids")
        };
        let d1 = dist(1e-3);
        let d2 = dist(5e-4);
        let ratio = d1 / d2;
        out.push(PropertyResult::flag(
            "continuous_dependence_linear_response",
            (ratio - 2.0).abs() <= 0.2 && d1.is_finite(),
            format!("distance ratio {ratio} for delta = 1e-3 vs 5e-4"),
        ));
    }

    out
}

/// Unit-L2 perturbation direction shared by the continuous-dependence check.
fn perturbation_direction(scale: &VerifyScale) -> ScalarField {
    let f = random_state(scale, 3, 1.0, 12).theta;
    let n = lp_norm(&f, 2.0).expect("norm");
    f.scaled(1.0 / n)
}
