//! Error type shared by all modules.

use num_complex::Complex64;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Gamma or digamma evaluated at a non-positive integer.
    #[error("gamma-family pole at z = {0}")]
    GammaPole(Complex64),

    /// Hypergeometric `c` parameter is a non-positive integer.
    #[error("hypergeometric pole: c = {0} is a non-positive integer")]
    HypPole(Complex64),

    /// A series or transformation failed to converge.
    #[error("series did not converge: {0}")]
    NonConvergence(String),

    /// Argument outside the admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive ODE stepping failed to reach the requested tolerance.
    #[error("ODE step failure: {0}")]
    StepFailure(String),

    /// Least-squares branch fit is too ill-conditioned to trust.
    #[error("boundary fit ill-conditioned: {0}")]
    FitConditioning(String),

    /// An iterative solver hit its iteration cap.
    #[error("iteration limit reached: {0}")]
    IterationLimit(String),

    /// A tracked orbit left the admissible region `v > 0`.
    #[error("orbit lost positivity at t = {t}: v = {v}")]
    PositivityLoss { t: f64, v: f64 },

    /// Richardson extrapolation of the boundary flux diverged.
    #[error("extrapolation divergence: {0}")]
    ExtrapolationDivergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
