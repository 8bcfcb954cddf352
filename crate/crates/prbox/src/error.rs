//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PrBoxError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("matrix entry is NaN or infinite")]
    NonFiniteEntry,

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("not a valid density operator: {0}")]
    InvalidDensity(String),

    #[error("not a valid channel: {0}")]
    InvalidChannel(String),

    #[error("not a valid Choi operator: {0}")]
    InvalidChoi(String),

    #[error("not a valid effect: {0}")]
    InvalidEffect(String),

    #[error("not a valid correlation box: {0}")]
    InvalidBox(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PrBoxError>;
