use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The threshold is not defined because the alternative coincides with
    /// the null (tau = 0), which makes every objective identically zero.
    #[error("no threshold exists for tau = 0")]
    NoThreshold,

    #[error("objective undefined at z = {z}: mixture survival {survival} outside (0, 1)")]
    UndefinedPoint { z: f64, survival: f64 },

    #[error("at least {needed} values required, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("value out of domain: {0}")]
    OutOfDomain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
