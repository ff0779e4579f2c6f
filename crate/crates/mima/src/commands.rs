//! Run orchestration behind the CLI subcommands: simulate, picard, mollify.
//! Every command is a library function returning structured results; the
//! binary maps errors to exit codes (0 ok, 2 config, 3 numerical abort,
//! 4 non-convergence, 5 property failure).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::analysis::{DiagnosticsRecord, DriftMaxima};
use crate::config::RunConfig;
use crate::dynamics::{advance, AdvanceOptions, Trajectory};
use crate::error::{Error, Result};
use crate::picard::{
    contraction_profile, growth_certificate, linearized_certificates, pair_l2_distance,
    picard_solve, ContractionProfile, GrowthCertificate, PicardReport,
};
use crate::snapshot::{read_snapshot, write_snapshot, SnapshotHeader, Variable};
use crate::state::{make_initial, mollify, Mollifier, ThetaEtaState};

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
    pub max_drift: DriftMaxima,
    pub max_linf_grad_u: f64,
    pub max_div: f64,
    pub wall_time_s: f64,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", dir.display())))
}

fn fold_drift(m: &mut DriftMaxima, rec: &DiagnosticsRecord) {
    m.l1_theta = m.l1_theta.max(rec.drift_l1_theta);
    m.l2_theta = m.l2_theta.max(rec.drift_l2_theta);
    m.l4_theta = m.l4_theta.max(rec.drift_l4_theta);
    m.linf_theta = m.linf_theta.max(rec.drift_linf_theta);
    m.l1_eta = m.l1_eta.max(rec.drift_l1_eta);
    m.l2_eta = m.l2_eta.max(rec.drift_l2_eta);
    m.l4_eta = m.l4_eta.max(rec.drift_l4_eta);
    m.linf_eta = m.linf_eta.max(rec.drift_linf_eta);
    m.energy = m.energy.max(rec.drift_energy);
    m.slice_mean_max = m
        .slice_mean_max
        .max(rec.slice_mean_max_theta)
        .max(rec.slice_mean_max_eta);
}

fn write_state_snapshots(
    dir: &Path,
    node: usize,
    t: f64,
    state: &ThetaEtaState,
    cfg: &RunConfig,
) -> Result<()> {
    let model = cfg.model_params()?;
    for (field, var, tag) in [
        (&state.theta, Variable::Theta, "theta"),
        (&state.eta, Variable::Eta, "eta"),
    ] {
        let header = SnapshotHeader::new(state.grid(), model, t, var);
        let path = dir.join(format!("snap_{node:08}_{tag}.bin"));
        write_snapshot(field, &header, &path)?;
    }
    Ok(())
}

/// Run the nonlinear solver per config; writes `diagnostics.csv`, snapshots,
/// and `summary.json` into the output directory.
pub fn simulate(cfg: &RunConfig) -> Result<SimulateSummary> {
    let start = Instant::now();
    let grid = cfg.grid_spec()?;
    let params = cfg.model_params()?;
    let s0 = make_initial(&cfg.initial.kind, grid, &params, cfg.seed())?;
    let tg = cfg.time_grid(&s0)?;

    let dir = PathBuf::from(&cfg.output.directory);
    ensure_dir(&dir)?;
    let mut csv = fs::File::create(dir.join("diagnostics.csv"))?;
    writeln!(csv, "{}", DiagnosticsRecord::CSV_HEADER)?;

    let snapshot_stride = cfg.output.snapshot_stride;
    let mut max_linf_grad_u = 0.0f64;
    let mut max_div = 0.0f64;
    let mut io_err: Option<Error> = None;
    let mut drift = DriftMaxima::default();
    {
        let mut hook = |node: usize, t: f64, state: &ThetaEtaState, rec: &DiagnosticsRecord| {
            if io_err.is_some() {
                return;
            }
            max_linf_grad_u = max_linf_grad_u.max(rec.linf_grad_u);
            max_div = max_div.max(rec.div_max);
            fold_drift(&mut drift, rec);
            if let Err(e) = writeln!(csv, "{}", rec.csv_row()) {
                io_err = Some(e.into());
                return;
            }
            let want_snap = snapshot_stride > 0 && node % snapshot_stride == 0;
            if want_snap {
                if let Err(e) = write_state_snapshots(&dir, node, t, state, cfg) {
                    io_err = Some(e);
                }
            }
        };
        let mut opts = AdvanceOptions {
            store_stride: 0,
            diag_stride: cfg.time.output_stride.max(1),
            cfl_policy: cfg.time.cfl_policy,
            hook: Some(&mut hook),
        };
        let traj = advance(&s0, &params, &tg, &mut opts)?;
        drop(opts);
        if let Some(e) = io_err {
            return Err(e);
        }
        // Final state snapshot is always written.
        write_state_snapshots(&dir, tg.nsteps, tg.t_end(), traj.final_state(), cfg)?;
    }

    let summary = SimulateSummary {
        steps: tg.nsteps,
        dt: tg.dt,
        t_end: tg.t_end(),
        max_drift: drift,
        max_linf_grad_u,
        max_div,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Config(format!("summary encode failed: {e}")))?;
    fs::write(dir.join("summary.json"), json)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct PicardRunReport {
    pub report: PicardReport,
    pub contraction: Option<ContractionProfile>,
    pub certificate: GrowthCertificate,
    /// Gronwall rate and vertical-derivative certificate of the linearized
    /// analysis, evaluated with the fixed point as the frozen field.
    pub j_tilde: f64,
    pub h_tilde: f64,
    /// Sup over time nodes of the pair-L^2 distance between the fixed point
    /// and the direct nonlinear solution.
    pub distance_to_nonlinear: f64,
    pub wall_time_s: f64,
}

/// Run the fixed-point construction per config; writes `picard_report.json`.
pub fn picard(cfg: &RunConfig) -> Result<PicardRunReport> {
    let start = Instant::now();
    let pc = cfg
        .picard
        .as_ref()
        .ok_or_else(|| Error::Config("picard section is required for this command".into()))?;
    let grid = cfg.grid_spec()?;
    let params = cfg.model_params()?;
    let s0 = make_initial(&cfg.initial.kind, grid, &params, cfg.seed())?;
    let tg = cfg.time_grid(&s0)?;
    let constants = cfg.constants();

    let (traj, report) = picard_solve(&s0, &params, &tg, pc.max_iters, pc.tol)?;
    let distance_to_nonlinear = distance_to_nonlinear(&s0, &params, &tg, &traj)?;

    let zero_data = s0.theta.max_abs() == 0.0 && s0.eta.max_abs() == 0.0;
    let certificate = if zero_data {
        // The zero solution needs no certificate; report the trivial one.
        GrowthCertificate {
            constants,
            horizon: tg.t_end(),
            c0_data: 0.0,
            j0: 1.0,
            h0: 1.0,
            j0_ln: 0.0,
            h0_ln: 0.0,
            measured_grad_ratio: None,
            measured_dz_ratio: None,
        }
    } else {
        growth_certificate(&s0, &params, tg.t_end(), &constants)?
            .with_measured(&traj, &s0)?
    };
    let (j_tilde, h_tilde) = if zero_data {
        (0.0, 0.0)
    } else {
        linearized_certificates(&traj, &s0, &params, tg.t_end(), &constants)?
    };
    let contraction = if report.residuals.len() >= 3 && !zero_data {
        Some(contraction_profile(&report, &params, &s0, tg.t_end(), &constants)?)
    } else {
        None
    };

    let out = PicardRunReport {
        report,
        contraction,
        certificate,
        j_tilde,
        h_tilde,
        distance_to_nonlinear,
        wall_time_s: start.elapsed().as_secs_f64(),
    };

    let dir = PathBuf::from(&cfg.output.directory);
    ensure_dir(&dir)?;
    let json = serde_json::to_string_pretty(&out)
        .map_err(|e| Error::Config(format!("report encode failed: {e}")))?;
    fs::write(dir.join("picard_report.json"), json)?;
    Ok(out)
}

/// Stream the direct nonlinear solution and compare against the stored fixed
/// point node by node without materializing a second trajectory.
pub fn distance_to_nonlinear(
    s0: &ThetaEtaState,
    params: &crate::state::ModelParams,
    tg: &crate::dynamics::TimeGrid,
    fixed_point: &Trajectory,
) -> Result<f64> {
    let mut dist = 0.0f64;
    advance_streamed(s0, params, tg, &mut |node, _t, state| {
        dist = dist.max(pair_l2_distance(state, &fixed_point.states[node])?);
        Ok(())
    })?;
    Ok(dist)
}

/// Nonlinear march that hands the physical state to a callback at every node
/// instead of storing a trajectory.
pub fn advance_streamed(
    s0: &ThetaEtaState,
    params: &crate::state::ModelParams,
    tg: &crate::dynamics::TimeGrid,
    on_node: &mut dyn FnMut(usize, f64, &ThetaEtaState) -> Result<()>,
) -> Result<()> {
    let mut spec = crate::dynamics::SpecState::of(s0);
    let mut rhs = crate::dynamics::NonlinearRhs;
    on_node(0, tg.t0, s0)?;
    for step in 0..tg.nsteps {
        let t = tg.node_time(step);
        let (next, _speed) = crate::dynamics::rk4_step_spec(&spec, &mut rhs, t, tg.dt, params);
        spec = next;
        if !spec.is_finite() {
            return Err(Error::NumericalAbort {
                step: step + 1,
                t: tg.node_time(step + 1),
                what: "state became non-finite (NaN/Inf)".into(),
            });
        }
        let phys = spec.to_physical();
        on_node(step + 1, tg.node_time(step + 1), &phys)?;
    }
    Ok(())
}

/// Mollify a snapshot file into a new snapshot with the same header.
pub fn mollify_file(input: &Path, output: &Path, epsilon: f64) -> Result<()> {
    let (field, header) = read_snapshot(input)?;
    let m = Mollifier::new(*field.grid(), epsilon)?;
    let smoothed = mollify(&field, &m)?;
    write_snapshot(&smoothed, &header, output)
}
