use std::io;

/// Errors produced by the spinchain library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("eigensolver did not converge: {0}")]
    Convergence(String),
    #[error("degenerate energy levels {first} and {second} (gap {gap:.3e}); first-order corrections undefined")]
    Degeneracy { first: usize, second: usize, gap: f64 },
    #[error("format error: {0}")]
    Format(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
