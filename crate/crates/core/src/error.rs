use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("conditioning on a zero-probability event: {0}")]
    ZeroProbability(String),
    #[error("inconsistent model: {0}")]
    InconsistentModel(String),
    #[error("unsupported intervention: {0}")]
    UnsupportedIntervention(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("arithmetic overflow in exact computation")]
    Overflow,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
