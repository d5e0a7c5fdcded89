use thiserror::Error;

/// Errors raised by the model, verification and fitting routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("amplitude is singular: beta vanishes at s = {s}")]
    SingularAmplitude { s: f64 },

    #[error("radicand {radicand} is negative at s = {s}; enable magnitude mode to evaluate sqrt(|sigma/beta|)")]
    NegativeRadicand { s: f64, radicand: f64 },

    #[error(
        "solitons {first} and {second} overlap: cross power {overlap:e} exceeds {threshold:e}"
    )]
    Overlap {
        first: usize,
        second: usize,
        overlap: f64,
        threshold: f64,
    },

    #[error("field does not decay at the domain boundary: |psi| = {edge:e} vs peak {peak:e}")]
    BoundaryDecay { edge: f64, peak: f64 },

    #[error("time step too large: dt * D * k_max^2 = {value} (must be < {limit})")]
    StepTooLarge { value: f64, limit: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("lattice too small: need at least {needed} nodes along {axis}, got {got}")]
    LatticeTooSmall {
        axis: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("field has zero norm")]
    ZeroNorm,

    #[error("damped normal equations stayed singular up to lambda = {lambda:e}")]
    SingularSystem { lambda: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by the numerics rather than by inputs or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::SingularSystem { .. }
                | Error::SingularAmplitude { .. }
                | Error::ZeroNorm
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
