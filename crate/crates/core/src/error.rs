use thiserror::Error;

/// Errors raised by group arithmetic, word handling, cipher construction and
/// the experiment drivers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("wire map is not invertible: {0}")]
    NotInvertible(String),

    #[error("invalid cipher spec at {path}: {message}")]
    Spec { path: String, message: String },

    #[error("invalid embedding: {0}")]
    Embedding(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid permutation: {0}")]
    Permutation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn spec(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
