use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WgError {
    /// Caller supplied arguments outside an operation's domain.
    #[error("input error: {0}")]
    Input(String),
    /// A numerical routine did not reach its target accuracy.
    #[error("numeric error: {msg} (achieved {achieved:e})")]
    Numeric { msg: String, achieved: f64 },
    /// Brute-force routine refused because the requested size is too large.
    #[error("refused: {0}")]
    Refused(String),
    /// The measure has zero total weight, so its normalization is undefined.
    #[error("undefined measure: R(lambda) = 0")]
    UndefinedMeasure,
    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, WgError>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(WgError::Input(msg.into()))
}
