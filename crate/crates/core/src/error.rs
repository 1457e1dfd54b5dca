use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An integer computation left the 64-bit range.
    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    /// An argument is outside the range an operation supports.
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    /// A divisibility or membership precondition failed.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A value was required for a divisor that was not supplied.
    #[error("missing value for divisor {0}")]
    MissingDivisor(u64),

    /// A numerical procedure failed its own consistency check.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The state family cannot evaluate this kind of argument.
    #[error("state {state} cannot evaluate {argument}")]
    KindMismatch {
        state: &'static str,
        argument: &'static str,
    },

    /// A measure failed to decompose into extremal measures.
    #[error("not subconformal: coefficient for n = {n} is {value:e}")]
    NotSubconformal { n: u64, value: f64 },

    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(what: &'static str, detail: impl Into<String>) -> Error {
    Error::OutOfRange {
        what,
        detail: detail.into(),
    }
}
