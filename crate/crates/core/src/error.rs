use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Probability mass discarded by a finite cutoff exceeds the allowed threshold.
    #[error("truncation error: discarded mass {mass:e} exceeds threshold {threshold:e}")]
    Truncation { mass: f64, threshold: f64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// A measurement outcome whose probability is below the underflow floor.
    #[error("impossible outcome: probability {probability:e}")]
    ImpossibleOutcome { probability: f64 },

    #[error("no heralded successes: {0}")]
    NoSuccess(String),

    #[error("grid too coarse: density integrates to {integral} (tolerance {tolerance:e})")]
    GridTooCoarse { integral: f64, tolerance: f64 },
}

impl Error {
    /// Short stable identifier used in tabular output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Truncation { .. } => "truncation",
            Error::Range(_) => "range",
            Error::Shape(_) => "shape",
            Error::Degenerate(_) => "degenerate",
            Error::Validation(_) => "validation",
            Error::ImpossibleOutcome { .. } => "impossible",
            Error::NoSuccess(_) => "no_success",
            Error::GridTooCoarse { .. } => "grid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
