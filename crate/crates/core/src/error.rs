use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    #[error(
        "matrix is not positive definite: eigenvalue {eigenvalue:e} at or below tolerance {tolerance:e}"
    )]
    NotPositiveDefinite { eigenvalue: f64, tolerance: f64 },

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix with Frobenius norm {norm:e}")]
    EigenDidNotConverge { dim: usize, norm: f64 },

    #[error("matrix exponential overflow: eigenvalue {eigenvalue:e} exceeds {limit:e}")]
    ExpOverflow { eigenvalue: f64, limit: f64 },

    #[error("singular matrix in {context}")]
    Singular { context: &'static str },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
