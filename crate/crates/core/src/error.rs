use thiserror::Error;

/// Errors raised across the simulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("slot {slot} out of range for {slots} tensor slots")]
    SlotOutOfRange { slot: usize, slots: usize },

    #[error("basis of {states} states exceeds the limit of {limit}")]
    DimensionOverflow { states: u128, limit: u128 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("not converged: {what} (residual {residual:e})")]
    NotConverged { what: String, residual: f64 },

    #[error("operator is not Hermitian: imaginary part {imag:e} of an expectation value")]
    NonHermitian { imag: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("no dominant spectral peak above the noise floor")]
    NoPeak,

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
