//! Run configuration: a human-editable TOML file mirroring `RunConfig`.
//! Parse errors carry the offending line/field; `to_canonical_toml` is the
//! documented canonical serialization (section order as declared here,
//! defaults materialized).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{CflPolicy, TimeGrid};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::picard::CertificateConstants;
use crate::state::{InitialKind, ModelParams};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridConfig {
    pub l: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelConfig {
    pub u0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TimeConfig {
    /// Fixed step; exactly one of `dt` / `cfl_safety` must be given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Derive the step from the initial state's CFL bound with this safety
    /// factor, then round so an integer number of steps lands on `t_end`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl_safety: Option<f64>,
    pub t_end: f64,
    /// Steps between diagnostics rows; 1 = every step.
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    #[serde(default)]
    pub cfl_policy: CflPolicy,
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InitialConfig {
    #[serde(flatten)]
    pub kind: InitialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PicardConfig {
    pub max_iters: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutputConfig {
    pub directory: String,
    /// Node stride between state snapshots; 0 writes only the final state.
    #[serde(default)]
    pub snapshot_stride: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub time: TimeConfig,
    pub initial: InitialConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<CertificateConstants>,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("parse failed: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid_spec()?;
        self.model_params()?;
        match (self.time.dt, self.time.cfl_safety) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "time: give exactly one of dt / cfl_safety, not both".into(),
                ));
            }
            (None, None) => {
                return Err(Error::Config("time: one of dt / cfl_safety is required".into()));
            }
            (Some(dt), None) if !(dt > 0.0) => {
                return Err(Error::Config(format!("time.dt must be positive, got {dt}")));
            }
            (None, Some(s)) if !(s > 0.0 && s <= 1.0) => {
                return Err(Error::Config(format!("time.cfl_safety must be in (0,1], got {s}")));
            }
            _ => {}
        }
        if !(self.time.t_end > 0.0) {
            return Err(Error::Config(format!(
                "time.t_end must be positive, got {}",
                self.time.t_end
            )));
        }
        if self.initial.kind.needs_seed() && self.initial.seed.is_none() {
            return Err(Error::Config(
                "initial: seed is required for random initial kinds".into(),
            ));
        }
        if let Some(p) = &self.picard {
            if p.max_iters == 0 {
                return Err(Error::Config("picard.max_iters must be >= 1".into()));
            }
            if !(p.tol >= 0.0) {
                return Err(Error::Config(format!("picard.tol must be >= 0, got {}", p.tol)));
            }
        }
        if let Some(c) = &self.constants {
            c.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.output.directory.is_empty() {
            return Err(Error::Config("output.directory must not be empty".into()));
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.l, self.grid.nx, self.grid.ny, self.grid.nz)
            .map_err(|e| Error::Config(format!("grid: {e}")))
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        ModelParams::new(self.grid.l, self.model.u0)
            .map_err(|e| Error::Config(format!("model: {e}")))
    }

    pub fn constants(&self) -> CertificateConstants {
        self.constants.unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.initial.seed.unwrap_or(0)
    }

    /// Resolve the time grid. With `cfl_safety`, the step is derived from the
    /// initial state's CFL bound and shrunk so `t_end / dt` is an integer.
    pub fn time_grid(&self, initial: &crate::state::ThetaEtaState) -> Result<TimeGrid> {
        let t_end = self.time.t_end;
        let dt = match (self.time.dt, self.time.cfl_safety) {
            (Some(dt), None) => dt,
            (None, Some(safety)) => {
                let bound = crate::dynamics::cfl_dt(initial, &self.model_params()?, safety)?;
                if !bound.is_finite() {
                    // Quiescent state: fall back to a hundredth of the horizon.
                    t_end / 100.0
                } else {
                    bound
                }
            }
            _ => unreachable!("validated"),
        };
        let nsteps = (t_end / dt).ceil().max(1.0) as usize;
        TimeGrid::new(0.0, t_end / nsteps as f64, nsteps)
    }

    /// Canonical serialization: declared section order with defaults filled in.
    pub fn to_canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
