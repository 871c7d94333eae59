use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters violate a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The channel transmits nothing usable (zero efficiency, zero detection).
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn degenerate(msg: impl Into<String>) -> Error {
    Error::DegenerateChannel(msg.into())
}
