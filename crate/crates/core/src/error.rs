use thiserror::Error;

/// Errors raised across the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("input sequence must be non-increasing (violated at index {0})")]
    NotMonotone(usize),

    #[error("no equal-degree rewiring is available")]
    NoRewiring,

    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error("no edge set of the requested size matches the reference degrees")]
    NoMatchingEdgeSet,

    #[error("oracle cross-check failed: {0}")]
    OracleMismatch(String),

    #[error("could not bracket {target} edges: {reason}")]
    Bracket { target: usize, reason: String },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
