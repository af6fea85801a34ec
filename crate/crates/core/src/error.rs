use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("tail values must be strictly positive after the side transform")]
    NonPositiveTail,

    #[error("tail estimation failed: {0}")]
    Estimation(String),

    #[error("exceedance probability {p_exc} lies outside the estimated tail (max {max})")]
    OutOfTail { p_exc: f64, max: f64 },

    #[error("unavailable: {0}")]
    Unavailable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
