use thiserror::Error;

/// Errors raised by geometry, objective, solver and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("manifold mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("coordinate {index} is not strictly positive: {value}")]
    NonPositive { index: usize, value: f64 },

    #[error("matrix is not symmetric: relative asymmetry {asymmetry:e}")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite: eigenvalue {eigenvalue:e} (largest {largest:e})")]
    NotPositiveDefinite { eigenvalue: f64, largest: f64 },

    #[error("exponential overflow: argument magnitude {magnitude:e}")]
    Overflow { magnitude: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("symmetric eigensolver did not converge")]
    EigenNoConvergence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line search failed after {trials} trials")]
    LineSearchFailed { trials: usize },

    #[error("missing data: {0}")]
    MissingData(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
