use thiserror::Error;

/// Errors raised by the numerical kernels, the solvers and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line search exceeded {cap} backtracks (gradient inconsistent with objective?)")]
    LineSearchFailure { cap: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("rank policy returned {got}, expected a value in {lo}..={hi}")]
    Policy { got: usize, lo: usize, hi: usize },

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the `lowrank` binary: 2 for configuration
    /// problems, 3 for solver failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            Error::Io(_) | Error::Csv(_) | Error::Parse(_) => 4,
            _ => 3,
        }
    }
}
