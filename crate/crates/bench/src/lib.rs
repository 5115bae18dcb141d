//! Shared fixtures for the benchmark targets.

use hivdyn_core::{ModelParams, State};

/// The Indonesia worked-example parameter set.
pub fn indonesia() -> ModelParams {
    ModelParams {
        lambda_recruit: 229_800_000.0 / 67.39,
        beta: 0.3465 / 229_800_000.0,
        mu: 1.0 / 67.39,
        delta: 0.7012,
        alpha: 0.2351,
        epsilon: 0.3243,
        eta: 0.2059,
        nu: 0.7661,
        gamma: 0.1882,
        rho: 0.000_365_23,
    }
}

pub fn indonesia_x0() -> State {
    State::new(129_789_089.0, 100_000_000.0, 7_195.0, 0.0, 3_716.0)
}
