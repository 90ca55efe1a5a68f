use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// The small-rotation denominator `Δ + Δ_j` vanished or changed sign.
    #[error("singular rotation for nearby level {level}: Δ + Δ_j = {denominator}")]
    SingularRotation { level: usize, denominator: f64 },

    #[error("spectrum has no lines")]
    EmptySpectrum,

    #[error("grid is not symmetric about zero (worst mismatch {mismatch:e})")]
    AsymmetricGrid { mismatch: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid initial state: trace deviates from one by {deviation:e}")]
    InvalidState { deviation: f64 },

    #[error("Fock truncation n_max = {n_max} too small, need at least {required}")]
    TruncationTooSmall { n_max: usize, required: usize },

    /// Time average did not settle; `frequencies` lists the slowest surviving oscillations.
    #[error("time average did not converge after {doublings} doublings (window {window}, residual {residual:e})")]
    NoConvergence {
        doublings: usize,
        window: f64,
        residual: f64,
        frequencies: Vec<f64>,
    },

    #[error("tau sampling too coarse: step {step} exceeds {limit}")]
    Aliasing { step: f64, limit: f64 },

    #[error("tau range {tau_max} shorter than required {required}")]
    TauRangeTooShort { tau_max: f64, required: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
