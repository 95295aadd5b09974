use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sensor configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("invalid level set: {0}")]
    InvalidLevels(String),

    #[error("invalid radiance map: {0}")]
    InvalidRadiance(String),

    #[error("dimension mismatch: {0}")]
    Dimensions(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("statistic is undefined: {0}")]
    Undefined(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
