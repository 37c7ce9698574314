use thiserror::Error;

/// Errors produced by the library.
///
/// Precondition failures are kept distinct from `false` answers: an operation
/// asked about a parameter outside its analysed region reports the violated
/// inequality instead of silently returning a boolean.
#[derive(Debug, Error)]
pub enum Error {
    /// A stated precondition does not hold; the message names the violated
    /// inequality or membership condition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Malformed input (parse errors, bad arguments).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The operation is not defined for this input (division by zero,
    /// non-unit constant term, zero polynomial).
    #[error("domain error: {0}")]
    Domain(String),

    /// The request is outside what the exact machinery supports.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
