use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mixing angle undefined: V_E1 = V_E2 = 0")]
    DegenerateStrain,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("integration step {dt} ns is too large (trace error {trace_error:e} at t = {t} ns)")]
    StepTooLarge { dt: f64, t: f64, trace_error: f64 },

    #[error("Bessel argument {x} outside the supported range |x| < 700")]
    OutOfRange { x: f64 },

    #[error("Floquet truncation {trunc_n} too small, need at least {required}")]
    TruncationTooSmall { trunc_n: usize, required: usize },

    #[error("spectrum needs at least 3 samples, found {0}")]
    EmptySpectrum(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
