use thiserror::Error;

/// Errors raised across the library.
///
/// Variants follow the failure classes callers act on: bad mathematical
/// input, invalid experiment configuration, API misuse, or a numerical
/// routine that failed to converge.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err($crate::error::Error::$variant(format!($($fmt)+)));
        }
    };
}

pub(crate) use ensure;
