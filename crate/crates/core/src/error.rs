use thiserror::Error;

/// Errors raised by the library. Verification failures are never errors;
/// they are recorded in reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (log of a
    /// non-positive number, `k > n`, a non-integral n-type, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A structural precondition was violated (mismatched alphabet sizes,
    /// weights not summing to one, overlapping partition cells, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("unknown bound id `{0}`")]
    UnknownBound(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
