use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("missing setting tuple {0:?} in correlation table")]
    MissingSetting(Vec<usize>),
    #[error("degenerate conditioning: P(conditioning event) = {0:e}")]
    DegenerateConditioning(f64),
    #[error("singular denominator in original inequality (<C~> = {0})")]
    SingularDenominator(f64),
    #[error("zero-count setting {0:?}")]
    ZeroCount(Vec<usize>),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("solver failure: {0}")]
    Solver(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
