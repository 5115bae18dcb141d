//! Simulation and analysis toolkit for a five-compartment stochastic
//! HIV/AIDS transmission model with protection awareness.
//!
//! The crate computes the deterministic and stochastic threshold indices and
//! equilibria in closed form, integrates the rate equations (RK4) and the
//! noisy system (Euler-Maruyama and its nonnegativity- / positivity-
//! preserving truncated variants), estimates stationary and extinction
//! behavior by Monte Carlo, and fits parameters to yearly case counts.

pub mod calibration;
pub mod ensemble;
pub mod equilibria;
pub mod error;
pub mod integrators;
pub mod model;
pub mod thresholds;

pub use calibration::{FitResult, FitSpec, FreeParam, ObsRecord, ObsTarget, ObservedSeries};
pub use ensemble::{
    CompartmentSummary, EnsembleConfig, EnsembleSummary, Histogram, ParamField, TimeAverages,
};
pub use error::{Error, Result};
pub use integrators::{Scheme, StepConfig, Trajectory, TrajectoryMeta, TruncationContext};
pub use model::{Compartment, ModelParams, NoiseIntensities, State};
pub use thresholds::{ExtinctionVariant, ThresholdReport};
