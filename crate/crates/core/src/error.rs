use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the decoding pipeline and its tools.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid band {low_hz}-{high_hz} Hz for a signal sampled at {rate} Hz")]
    InvalidBand { low_hz: f64, high_hz: f64, rate: f64 },

    #[error("invalid rate: {0} Hz")]
    InvalidRate(f64),

    #[error("insufficient data{}: {available} samples available, {required} required", trial.map(|k| format!(" in trial {k}")).unwrap_or_default())]
    InsufficientData {
        trial: Option<usize>,
        available: usize,
        required: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular system: smallest pivot {pivot:e} at index {index}")]
    SingularSystem { index: usize, pivot: f64 },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("degenerate variance: within-group variance is zero")]
    DegenerateVariance,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
