use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid ruler: {0}")]
    InvalidRuler(String),

    /// Two mark pairs produce the same difference.
    #[error(
        "not a difference triangle set: difference {difference} occurs twice, at (ruler, mark, mark) = {first:?} and {second:?}"
    )]
    NotADts {
        difference: i64,
        first: (usize, usize, usize),
        second: (usize, usize, usize),
    },

    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("structural verification failed: {0}")]
    Structural(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
