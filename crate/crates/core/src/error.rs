use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Input validation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("`{0}` must not be empty")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// A weight update produced a non-finite value.
///
/// `iteration` is the 1-based index of the step whose update failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("filter diverged at iteration {iteration}")]
pub struct Divergence {
    pub iteration: u64,
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
