use alloc::string::String;

/// Errors raised by the walk, Wigner and observable routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The field does not integrate to one over the negativity range.
    #[error("inconsistent field: normalization is {normalization}, expected 1")]
    InconsistentField { normalization: f64 },
    /// An eigenvalue of a coin density matrix fell outside `[0, 1]` by more
    /// than rounding can explain.
    #[error("coin density eigenvalue {value} outside [0, 1]")]
    EigenvalueOutOfRange { value: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
