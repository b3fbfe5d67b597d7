use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller-supplied data or parameters violate a precondition.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("matrix market format error (line {line}): {msg}")]
    Format { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A kernel issued an instruction the vector model rejects.
    #[error("vector model fault: {0}")]
    Fault(#[from] ModelFault),

    /// An internal invariant was violated (e.g. a hash table filled up).
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            msg: msg.into(),
        }
    }
}

/// Illegal instruction issued to a [`crate::VecEngine`].
///
/// These indicate a kernel bug, never bad user input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelFault {
    #[error("lane {lane}: index {index} out of bounds for length {len}")]
    OutOfBounds { lane: usize, index: usize, len: usize },

    #[error("scatter writes index {index} from more than one lane")]
    DuplicateScatterIndex { index: usize },

    #[error("register length {found} does not match active vector length {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("compress-store needs {needed} slots but only {available} remain")]
    Capacity { needed: usize, available: usize },
}
