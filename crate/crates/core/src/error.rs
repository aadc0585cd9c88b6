use alloc::string::String;

/// Errors raised by matrix, state and channel operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {0} exceeds the supported maximum of 64")]
    TooLarge(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("channel is not trace preserving (residual {0:e})")]
    NotTracePreserving(f64),

    #[error("invalid Choi matrix: {0}")]
    InvalidChoi(String),

    #[error("matrix is not an isometry (residual {0:e})")]
    NotIsometry(f64),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
