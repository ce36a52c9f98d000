//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller-supplied value violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An element or subcarrier index is outside the configured array.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A truncated series failed its stopping rule within the term budget.
    /// Carries the magnitude of the last evaluated term.
    #[error("series did not converge within {max_terms} terms (last term magnitude {last_term:e})")]
    SeriesNotConverged { max_terms: usize, last_term: f64 },

    /// Adaptive quadrature exhausted its subdivision budget. Carries the best
    /// estimate reached and the error bound achieved.
    #[error("quadrature tolerance {requested:e} not met (achieved {achieved:e}, estimate {estimate:e})")]
    QuadratureNotConverged {
        requested: f64,
        achieved: f64,
        estimate: f64,
    },

    /// The requested integral or series diverges for these parameters.
    #[error("parameter combination outside the convergence domain: {0}")]
    Domain(String),

    /// A floating-point computation produced an unusable result (overflow,
    /// NaN, or a residual above its consistency check).
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A geometric or power configuration collapses the quantity of interest
    /// (e.g. no orthogonal complement, co-located receivers, beta1 = 0).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
