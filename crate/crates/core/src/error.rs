use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0} vs {1} bins")]
    GridMismatch(usize, usize),
    #[error("invalid measure: {0}")]
    Measure(String),
    #[error("invalid polynomial: {0}")]
    Polynomial(String),
    #[error("invalid ensemble: {0}")]
    Ensemble(String),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
