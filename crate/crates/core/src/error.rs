use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypergeometric series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("time {t:e} s is outside the field grid [{start:e}, {end:e}] s")]
    OutOfGrid { t: f64, start: f64, end: f64 },

    #[error("step size underflow at t = {t:e} s (h = {h:e} s)")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("invariant violated at t = {t:e} s: {what}")]
    InvariantViolation { t: f64, what: String },

    #[error("trajectory truncated: {0}")]
    Truncation(String),

    #[error("invalid config `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("Fock truncation not converged at n_max = {n_max}: |delta pi_e| = {delta:e}")]
    FockConvergence { n_max: usize, delta: f64 },

    #[error("sweep cell ({i}, {j}) failed: {source}")]
    SweepCell {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by invalid user input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config { .. } => true,
            Error::SweepCell { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
