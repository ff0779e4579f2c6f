use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: field is identically zero")]
    ZeroField { context: &'static str },

    #[error("numerical abort at step {step} (t = {t}): {what}")]
    NumericalAbort { step: usize, t: f64, what: String },

    #[error("CFL violation at step {step}: dt = {dt} exceeds limit {limit}")]
    CflViolation { step: usize, dt: f64, limit: f64 },

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config/setup, 3 numerical abort,
    /// 4 non-convergence (mapped by the caller), 5 property failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::GridMismatch(_) => 2,
            Error::NumericalAbort { .. } | Error::CflViolation { .. } => 3,
            Error::ZeroField { .. } => 2,
            Error::Snapshot(_) | Error::Io(_) => 2,
        }
    }
}
