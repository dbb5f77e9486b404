use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The family is not a circle diffeomorphism (or fails t-regularity) somewhere in `[0,1]`.
    #[error("degenerate family: {0}")]
    DegenerateFamily(String),
    /// A fiber map of a skew product fails `1 + d/dy g > 0`.
    #[error("degenerate fiber: {0}")]
    DegenerateFiber(String),
    #[error("no lock for {p}/{q} in parameter bracket [{lo}, {hi}]")]
    NoLockInBracket { p: i64, q: u64, lo: f64, hi: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// Orbit never entered the given bin.
    #[error("bin {bin} of {bins} was never visited")]
    EmptyBin { bin: usize, bins: usize },
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("csv output: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
