use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown character {0:?}")]
    UnknownCharacter(char),
    #[error("invalid word {word:?}: {reason}")]
    InvalidWord { word: String, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("target {word:?} needs at least {needed} steps, got {steps}")]
    InfeasibleTarget {
        word: String,
        needed: usize,
        steps: usize,
    },
    #[error("brute-force enumeration too large: {0}")]
    TooLarge(String),
    #[error("no lexicon word is feasible for {steps} steps")]
    NoFeasibleWord { steps: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid_word(word: &str, reason: impl Into<String>) -> Self {
        Error::InvalidWord {
            word: word.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
