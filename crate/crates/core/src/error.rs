use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A computation would exceed its configured work budget.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// Floating-point accumulation left the finite range.
    #[error("overflow: {0}")]
    Overflow(String),
    /// Two transformations were asked to commute but cannot.
    #[error("structural error: {0}")]
    Structural(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
