//! Error type shared by all modules.

use thiserror::Error;

/// Failures surfaced by fitting, detection, and the two-sector solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Segment unusable for fitting: fewer than four points, or values that
    /// are non-positive / non-finite.
    #[error("degenerate segment: {0}")]
    DegenerateSegment(String),

    /// The optimizer hit its iteration cap while still making progress.
    #[error("fit did not converge after {iterations} iterations (projected gradient {grad_norm:e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },

    /// Sector rates outside the domain of the requested quantity
    /// (e.g. the asymptotic inequality needs alpha1 > alpha2).
    #[error("degenerate sector rates: {0}")]
    DegenerateRates(String),

    /// A ratio whose denominator vanished (w2 = 0, beta = 0, ...).
    #[error("division by zero: {0}")]
    DivisionByZero(String),

    /// The integrator produced NaN or infinity.
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
