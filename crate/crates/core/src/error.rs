use thiserror::Error;

/// Errors raised by the risk engine.
///
/// Configuration problems are separated from estimator diagnostics so callers
/// can map them to different exit paths.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("grid cell {cell} has non-positive density {density}; cannot allocate samples to it")]
    ZeroDensityCell { cell: usize, density: f64 },

    #[error("importance-sampling estimate {value} exceeds 1; the learned density is inconsistent with the sample space")]
    EstimateAboveOne { value: f64 },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for runtime estimator diagnostics, false for configuration errors.
    pub fn is_diagnostic(&self) -> bool {
        !matches!(self, Error::InvalidParameter { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
