use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parse error at offset {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("digit '{digit}' at offset {position} is out of range for radix {radix}")]
    Radix {
        position: usize,
        digit: char,
        radix: u32,
    },

    #[error("Pauli exclusion: fermion operator {0} occurs twice")]
    PauliExclusion(String),

    /// A rewrite rule was asked to fire where its left-hand side is absent.
    #[error("rewrite not applicable: {0}")]
    NotApplicable(String),

    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}
