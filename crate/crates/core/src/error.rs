use thiserror::Error;

/// Errors across the spectral toolkit.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("bump leakage {measured:.3e} above tolerance {tolerance:.3e}")]
    Leakage { measured: f64, tolerance: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("ellipticity violated: {0}")]
    Ellipticity(String),

    #[error("step size too large: {0}")]
    StepSize(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
