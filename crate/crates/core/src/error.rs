use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or inconsistent input (dimensions, ranges, probabilities).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An instance file failed to parse or validate.
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// The operation's mathematical precondition does not hold.
    #[error("domain error: {0}")]
    Domain(String),

    /// The receiver's region for `action` is empty at the target type, so no
    /// posterior can be moved there.
    #[error("no adjustment exists: best-reply region of action {action} is empty at the target type")]
    NoAdjustment { action: usize },

    /// A result contradicted a structural guarantee (for instance the
    /// low-dimensional containment property).
    #[error("internal consistency error: {0}")]
    InternalConsistency(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::InternalConsistency(msg.into())
    }

    /// True for errors caused by the caller's data rather than by the solver.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Parse { .. } | Error::Domain(_) | Error::NoAdjustment { .. } | Error::Io(_)
        )
    }
}
