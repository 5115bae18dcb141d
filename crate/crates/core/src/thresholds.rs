//! Closed-form threshold indices: the deterministic basic reproduction
//! number, its stochastic persistence counterpart, and the extinction index
//! with its noise condition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, NoiseIntensities};

/// The composite rate constants k1..k6.
///
/// `k3` is carried for report completeness but enters none of the
/// implemented index formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    pub k6: f64,
}

impl Constants {
    pub fn new(p: &ModelParams, n: &NoiseIntensities) -> Self {
        Self {
            k1: p.mu + p.delta + p.nu,
            k2: p.mu + p.eta,
            k3: p.beta * (p.mu + (1.0 - p.epsilon) * p.alpha) * p.lambda_recruit
                / (p.mu * (p.mu + p.alpha)),
            k4: p.rho + p.gamma + p.mu,
            k5: p.mu + 0.5 * n.sigma[1] * n.sigma[1],
            k6: p.mu + p.alpha + 0.5 * n.sigma[0] * n.sigma[0],
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.k1, self.k2, self.k3, self.k4, self.k5, self.k6]
    }
}

/// Numerator shared by the deterministic and stochastic indices.
fn index_numerator(p: &ModelParams, k: &Constants) -> f64 {
    p.beta * (p.mu + (1.0 - p.epsilon) * p.alpha) * k.k1 * k.k2 * p.lambda_recruit
}

/// The bracket `k1 k2 (k4 + s3^2/2) - (k1 + s5^2/2) rho eta - (k2 + s4^2/2) gamma nu`.
///
/// At zero noise this equals the deterministic denominator bracket
/// `mu [k2 (k1 + gamma) + rho k1 + gamma delta] + eta gamma delta` exactly in
/// real arithmetic; both indices evaluate it through this one code path so
/// that the zero-noise reduction holds to the last bit.
fn inner_bracket(p: &ModelParams, k: &Constants, n: &NoiseIntensities) -> f64 {
    let half = |s: f64| 0.5 * s * s;
    k.k1 * k.k2 * (k.k4 + half(n.sigma[2]))
        - (k.k1 + half(n.sigma[4])) * p.rho * p.eta
        - (k.k2 + half(n.sigma[3])) * p.gamma * p.nu
}

/// Basic reproduction number of the deterministic model.
pub fn r0(p: &ModelParams) -> f64 {
    let k = Constants::new(p, &NoiseIntensities::ZERO);
    index_numerator(p, &k) / (k.k5 * k.k6 * inner_bracket(p, &k, &NoiseIntensities::ZERO))
}

/// Stochastic persistence index; `> 1` implies a unique ergodic stationary
/// distribution.
///
/// Errors with [`Error::NonpositiveDenominator`] when the inner bracket is
/// not positive, where the index is undefined.
pub fn r0_stochastic(p: &ModelParams, n: &NoiseIntensities) -> Result<f64> {
    let k = Constants::new(p, n);
    let bracket = inner_bracket(p, &k, n);
    if bracket <= 0.0 {
        return Err(Error::NonpositiveDenominator { bracket });
    }
    Ok(index_numerator(p, &k) / (k.k5 * k.k6 * bracket))
}

/// `min(delta + sigma5^2/2, sigma3^2/2, sigma4^2/2)`.
pub fn sigma_hat(p: &ModelParams, n: &NoiseIntensities) -> f64 {
    let half = |s: f64| 0.5 * s * s;
    (p.delta + half(n.sigma[4]))
        .min(half(n.sigma[2]))
        .min(half(n.sigma[3]))
}

/// Which reading of the extinction index to evaluate.
///
/// The theorem statement and its proof disagree by a factor `mu (mu + alpha)`
/// in the denominator; both readings are exposed, labeled, so the toolkit
/// never silently picks a side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtinctionVariant {
    /// The formula exactly as the theorem statement prints it.
    Printed,
    /// The formula the proof's final display implies.
    Derivation,
}

/// Stochastic extinction index; `< 1` (with the noise condition) is the
/// theorem's hypothesis for almost-sure extinction of `I`, `C`, `A`.
pub fn r0_extinction(p: &ModelParams, n: &NoiseIntensities, variant: ExtinctionVariant) -> f64 {
    let numerator = p.beta * (p.mu + (1.0 - p.epsilon) * p.alpha) * p.lambda_recruit;
    let damping = p.mu + sigma_hat(p, n) / 3.0;
    match variant {
        ExtinctionVariant::Printed => numerator / damping,
        ExtinctionVariant::Derivation => numerator / (p.mu * (p.mu + p.alpha) * damping),
    }
}

/// The noise condition `mu > max_i(sigma_i^2) / 2`.
pub fn noise_condition(p: &ModelParams, n: &NoiseIntensities) -> bool {
    let max_sq = n.sigma.iter().map(|s| s * s).fold(0.0, f64::max);
    p.mu > 0.5 * max_sq
}

/// All threshold quantities for one parameter/noise configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub r0: f64,
    pub r0_s: f64,
    pub r0_e_printed: f64,
    pub r0_e_derivation: f64,
    pub k: [f64; 6],
    pub sigma_hat: f64,
    pub noise_condition_holds: bool,
}

impl ThresholdReport {
    pub fn compute(p: &ModelParams, n: &NoiseIntensities) -> Result<Self> {
        Ok(Self {
            r0: r0(p),
            r0_s: r0_stochastic(p, n)?,
            r0_e_printed: r0_extinction(p, n, ExtinctionVariant::Printed),
            r0_e_derivation: r0_extinction(p, n, ExtinctionVariant::Derivation),
            k: Constants::new(p, n).as_array(),
            sigma_hat: sigma_hat(p, n),
            noise_condition_holds: noise_condition(p, n),
        })
    }
}
