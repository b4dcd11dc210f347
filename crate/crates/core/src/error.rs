use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point does not belong to the space: {0}")]
    Domain(String),
    #[error("points belong to different spaces")]
    Mismatch,
    #[error("operation `{op}` is not supported on {space}")]
    Unsupported { op: &'static str, space: String },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("map validation failed: {0}")]
    Validation(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn unsupported(op: &'static str, space: impl Into<String>) -> Self {
        Error::Unsupported {
            op,
            space: space.into(),
        }
    }
}
