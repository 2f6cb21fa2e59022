use thiserror::Error;

/// Errors raised by the simulation toolkit.
///
/// Variants are grouped so a front end can map them onto coarse categories
/// (configuration, numerical failure, resource budget).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("lapack routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse error category, used for exit codes at the CLI boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numeric,
    Budget,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Geometry(_) | Error::InvalidArgument(_) | Error::Parse(_) | Error::Json(_) => {
                ErrorKind::Config
            }
            Error::Budget(_) => ErrorKind::Budget,
            Error::Numeric(_) | Error::Lapack { .. } => ErrorKind::Numeric,
            Error::Io(_) => ErrorKind::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
