use thiserror::Error;

/// Errors raised by the simulation kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("system of {sites} sites exceeds the limit of {limit} for this path")]
    TooLarge { sites: usize, limit: usize },

    #[error("Floquet operator is not unitary (max |U^dag U - I| = {0:e})")]
    NonUnitary(f64),

    #[error("non-finite state encountered: {0}")]
    NonFinite(String),

    #[error("duplicate seed {0} in ensemble")]
    DuplicateSeed(u64),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
