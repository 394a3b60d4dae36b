use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("ring elements or matrices from different contexts")]
    ContextMismatch,
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("not divisible: {0}")]
    NotDivisible(String),
    #[error("not representable: {0}")]
    NotRepresentable(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("not a direct summand: {0}")]
    NotSummand(String),
    #[error("invalid module data: {0}")]
    InvalidModule(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
