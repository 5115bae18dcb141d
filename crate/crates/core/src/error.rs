use thiserror::Error;

/// Errors surfaced by the model, integrators, estimators, and calibration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or configuration field violates its invariant.
    #[error("invalid value for `{name}`: {value} ({reason})")]
    InvalidValue {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The stochastic index denominator bracket is not positive, so the
    /// index is undefined at these inputs.
    #[error("stochastic index undefined: inner bracket = {bracket} <= 0")]
    NonpositiveDenominator { bracket: f64 },

    /// A state component became non-finite while stepping.
    #[error("non-finite state at step {step}")]
    StepOverflow { step: usize },

    /// An extinction threshold at or below the positivity floor of the
    /// scheme can never be crossed.
    #[error("extinction threshold {threshold} must exceed 3*dt = {floor} under pptem")]
    ThresholdBelowFloor { threshold: f64, floor: f64 },

    /// Total infection mass I+C+A is not positive where a logarithm is needed.
    #[error("I+C+A is not positive at t_end")]
    NonpositiveMass,

    /// A histogram was requested over samples with no post-burn-in data.
    #[error("no samples after burn-in")]
    NoSamples,

    /// The fit specification frees no parameters.
    #[error("fit spec must free at least one parameter")]
    NoFreeParameters,

    /// Fewer observations than free parameters.
    #[error("need at least {need} observations, got {got}")]
    TooFewObservations { need: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
