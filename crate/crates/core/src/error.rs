use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Kernel evaluated closer to the diagonal `t = tau` than the guard allows.
    #[error("time separation {separation:e} is below the guard {guard:e}")]
    TimeSeparation { separation: f64, guard: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("zero normalization in {0}")]
    ZeroNormalization(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
