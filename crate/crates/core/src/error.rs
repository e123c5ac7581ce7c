use thiserror::Error;

#[derive(Debug, Error)]
pub enum CritError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("observer aborted the chain: {0}")]
    Observer(String),
}

pub type Result<T> = std::result::Result<T, CritError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(CritError::InvalidArgument(msg.into()))
}
