use thiserror::Error;

/// Errors surfaced by the engine. The CLI maps these onto distinct exit
/// codes, so keep the variants coarse and stable.
#[derive(Debug, Error)]
pub enum EngineError {
    /// Shape mismatches: wrong dimension, wrong number of time slices, etc.
    #[error("structural error: {0}")]
    Structural(String),
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An invariant on the input data does not hold (non-refining
    /// partitions, non-measurable stopping time, broken dominance, ...).
    #[error("validation error: {0}")]
    Validation(String),
    /// A generator or simulator spec exceeds the configured size caps.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// Malformed or inconsistent experiment configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, EngineError>;
