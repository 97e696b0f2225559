use thiserror::Error;

/// Everything that can go wrong inside the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CqedError {
    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("degenerate superposition: resulting norm {norm:e} is below 1e-12")]
    DegenerateSuperposition { norm: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("state leaves the gate subspace: amplitude {amplitude:e} above n = 1")]
    Subspace { amplitude: f64 },

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid error: {0}")]
    Grid(String),
}

impl CqedError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        CqedError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CqedError>;
