use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schedule index {index} out of range: explicit schedule has {len} values")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("cannot parse schedule `{input}`: {reason}")]
    ScheduleSyntax { input: String, reason: String },

    #[error("zero bandwagon weight at index {0}: affine inversion undefined")]
    ZeroLambda(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("enumeration is limited to n <= {max}, got n = {n}")]
    EnumerationTooLarge { n: usize, max: usize },

    #[error("checkpoint mismatch: {0}")]
    CheckpointMismatch(String),

    #[error("malformed data: {0}")]
    MalformedData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
