use thiserror::Error;

/// Crate-wide error type.
///
/// The variants map onto the CLI exit codes: `Input` and `Parse` are caller
/// mistakes (exit 2), `Capacity` marks a request beyond the exact-computation
/// budgets (exit 3), and `Io` wraps filesystem failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument values (negative weights, out-of-range indices, …).
    #[error("input error: {0}")]
    Input(String),
    /// The instance is too large for an exact computation.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// Malformed JSON or CSV input.
    #[error("parse error: {0}")]
    Parse(String),
    /// Filesystem failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}
