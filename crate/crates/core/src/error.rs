use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KrylovError {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("operator must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("initialization breakdown: b^T c = 0, the biorthogonalization process cannot start")]
    InitBreakdown,

    #[error("invalid scaling: diagonal entry {index} is zero")]
    InvalidScaling { index: usize },

    #[error("invalid sparse structure: {0}")]
    InvalidSparse(String),

    #[error("matrix market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("the BiCG point is undefined at iteration {iteration} (singular tridiagonal projection)")]
    UndefinedPoint { iteration: usize },

    #[error("singular factor at iteration {iteration}")]
    SingularFactor { iteration: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = KrylovError> = std::result::Result<T, E>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(KrylovError::DimensionMismatch { what, expected, got })
    }
}
