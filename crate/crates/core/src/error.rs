use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A size limit that keeps exhaustive computation tractable was exceeded.
    #[error("{what} exceeds cap: {actual} > {limit}")]
    CapExceeded {
        what: &'static str,
        limit: u128,
        actual: u128,
    },

    #[error("search budget exhausted: {0}")]
    BudgetExceeded(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid mistake tree: {0}")]
    InvalidTree(String),

    #[error("linear program failed: {0}")]
    LpFailure(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("sample oracle exhausted after {0} draws")]
    OracleExhausted(usize),

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// True for errors that come from a size/budget limit rather than bad input.
    pub fn is_cap_violation(&self) -> bool {
        matches!(
            self,
            Error::CapExceeded { .. } | Error::BudgetExceeded(_) | Error::Overflow(_)
        )
    }

    pub(crate) fn cap(what: &'static str, limit: impl Into<u128>, actual: impl Into<u128>) -> Self {
        Error::CapExceeded {
            what,
            limit: limit.into(),
            actual: actual.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
