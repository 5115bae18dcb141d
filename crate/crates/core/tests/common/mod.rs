use rand::rngs::StdRng;
use rand::Rng;

use hivdyn_core::{ModelParams, State};

/// Worked example: Indonesia, persistence regime.
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

/// Same setting with the lower transmission rate of the extinction regime.
pub fn indonesia_extinction() -> ModelParams {
    ModelParams {
        beta: 0.1065 / 229_800_000.0,
        ..indonesia()
    }
}

pub fn indonesia_x0() -> State {
    State::new(129_789_089.0, 100_000_000.0, 7_195.0, 0.0, 3_716.0)
}

/// Worked example: China.
pub fn china() -> ModelParams {
    ModelParams {
        lambda_recruit: 1_376_460_000.0 / 76.34,
        beta: 0.71 / 1_376_460_000.0,
        mu: 1.0 / 76.34,
        delta: 0.42,
        alpha: 0.13,
        epsilon: 0.5,
        eta: 0.18,
        nu: 0.72,
        gamma: 0.14,
        rho: 0.82,
    }
}

pub fn china_x0() -> State {
    State::new(1_088_230_000.0, 288_230_000.0, 153_193.0, 295_358.0, 52_128.0)
}

/// Random valid parameter draw spanning realistic rate and population scales.
pub fn sample_params(rng: &mut StdRng) -> ModelParams {
    let log_rate = |rng: &mut StdRng| 10f64.powf(rng.gen_range(-4.0..0.3));
    ModelParams {
        lambda_recruit: 10f64.powf(rng.gen_range(2.0..7.0)),
        beta: 10f64.powf(rng.gen_range(-9.0..-2.0)),
        mu: 10f64.powf(rng.gen_range(-3.0..0.0)),
        delta: log_rate(rng),
        alpha: log_rate(rng),
        epsilon: rng.gen_range(0.01..0.99),
        eta: log_rate(rng),
        nu: log_rate(rng),
        gamma: log_rate(rng),
        rho: log_rate(rng),
    }
}

pub fn ulps(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64).abs_diff(b.to_bits() as i64)
}
