use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A computed quantity left its physical range; indicates a bug upstream.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("degenerate post-selection: detection probability {0:e}")]
    DegeneratePostselection(f64),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),
}

impl Error {
    /// Short category name, stable for command-line reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Internal(_) => "internal-error",
            Error::ResourceLimit(_) => "resource-limit",
            Error::DegeneratePostselection(_) => "degenerate-postselection",
            Error::InvalidChannel(_) => "invalid-channel",
        }
    }
}

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidArgument(format!($($arg)*))
    };
}
pub(crate) use invalid;
