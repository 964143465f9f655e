use thiserror::Error;

/// Errors raised while loading or combining machines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed monoid: {0}")]
    MalformedMonoid(String),

    #[error("unknown letter {0:?}")]
    UnknownLetter(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("malformed machine: {0}")]
    MalformedMachine(String),

    #[error("malformed SST: {0}")]
    MalformedSst(String),

    #[error("malformed forest at offset {offset}: {reason}")]
    MalformedForest { offset: usize, reason: String },

    #[error("invalid node: {0}")]
    InvalidNode(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
