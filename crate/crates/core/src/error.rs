use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A computation would exceed a configured feasibility cap.
    #[error("{what} exceeds the configured cap of {cap} (raise it with {knob})")]
    ResourceLimit {
        what: String,
        cap: usize,
        knob: &'static str,
    },

    #[error("empty sample")]
    EmptySample,

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
