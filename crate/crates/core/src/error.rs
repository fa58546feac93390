use thiserror::Error;

/// Errors raised by the verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("input error: {0}")]
    Input(String),
    /// A documented precondition of an inequality does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Eigensolver or quadrature failure.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A quantity that is nonnegative for genuine spectra came out negative.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    /// Enumeration range exceeds the integer types used.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! input_err {
    ($($arg:tt)*) => { $crate::error::Error::Input(format!($($arg)*)) };
}
pub(crate) use input_err;

impl Error {
    /// Prefix the message with where the error arose, keeping the variant.
    pub fn context(self, ctx: impl std::fmt::Display) -> Self {
        match self {
            Error::Input(m) => Error::Input(format!("{ctx}: {m}")),
            Error::Precondition(m) => Error::Precondition(format!("{ctx}: {m}")),
            Error::Numerical(m) => Error::Numerical(format!("{ctx}: {m}")),
            Error::Inconsistency(m) => Error::Inconsistency(format!("{ctx}: {m}")),
            Error::Capacity(m) => Error::Capacity(format!("{ctx}: {m}")),
            Error::Config(m) => Error::Config(format!("{ctx}: {m}")),
            Error::Io(m) => Error::Io(format!("{ctx}: {m}")),
        }
    }
}
