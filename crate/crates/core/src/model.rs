//! Parameters, state, and the deterministic vector field / diffusion
//! coefficients of the five-compartment transmission model.
//!
//! Compartments are susceptible-unaware (`S_u`), susceptible-aware (`S_a`),
//! infected untreated (`I`), infected under ART (`C`), and AIDS stage (`A`).
//! Incidence is bilinear (`beta * S * I`); the stochastic variant carries one
//! multiplicative white noise per compartment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ten deterministic rate parameters.
///
/// All rates are per unit time (the bundled worked examples use years);
/// `epsilon` is the dimensionless infection reduction for aware susceptibles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Recruitment rate into the unaware susceptible class.
    pub lambda_recruit: f64,
    /// Transmission rate (per individual per unit time).
    pub beta: f64,
    /// Natural death rate.
    pub mu: f64,
    /// AIDS mortality rate.
    pub delta: f64,
    /// Awareness migration rate `S_u -> S_a`.
    pub alpha: f64,
    /// Awareness-induced infection reduction, in (0, 1).
    pub epsilon: f64,
    /// Treatment relapse rate `C -> I`.
    pub eta: f64,
    /// Return rate `A -> I`.
    pub nu: f64,
    /// Progression rate `I -> A`.
    pub gamma: f64,
    /// Treatment uptake rate `I -> C`.
    pub rho: f64,
}

impl ModelParams {
    /// Checks every parameter invariant. Call once at construction or load;
    /// the model operations themselves assume validated inputs.
    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("lambda_recruit", self.lambda_recruit),
            ("beta", self.beta),
            ("mu", self.mu),
            ("delta", self.delta),
            ("alpha", self.alpha),
            ("eta", self.eta),
            ("nu", self.nu),
            ("gamma", self.gamma),
            ("rho", self.rho),
        ];
        for (name, value) in positives {
            if value <= 0.0 || !value.is_finite() {
                return Err(Error::InvalidValue {
                    name,
                    value,
                    reason: "must be strictly positive and finite",
                });
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidValue {
                name: "epsilon",
                value: self.epsilon,
                reason: "must lie in (0, 1)",
            });
        }
        Ok(())
    }
}

/// The five white-noise intensities, indexed by compartment
/// `(S_u, S_a, I, C, A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseIntensities {
    pub sigma: [f64; 5],
}

impl NoiseIntensities {
    pub const ZERO: Self = Self { sigma: [0.0; 5] };

    /// All five intensities equal.
    pub fn uniform(sigma: f64) -> Self {
        Self { sigma: [sigma; 5] }
    }

    pub fn validate(&self) -> Result<()> {
        for &s in &self.sigma {
            if s < 0.0 || !s.is_finite() {
                return Err(Error::InvalidValue {
                    name: "sigma",
                    value: s,
                    reason: "must be nonnegative and finite",
                });
            }
        }
        Ok(())
    }
}

/// One point `(S_u, S_a, I, C, A)` in the nonnegative orthant.
///
/// Populations are real-valued; simulations may transiently exceed the
/// deterministic invariant set under noise, which is why
/// [`in_invariant_set`] is a diagnostic rather than an enforcement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State {
    pub s_u: f64,
    pub s_a: f64,
    pub i: f64,
    pub c: f64,
    pub a: f64,
}

impl State {
    pub const ZERO: Self = Self {
        s_u: 0.0,
        s_a: 0.0,
        i: 0.0,
        c: 0.0,
        a: 0.0,
    };

    pub fn new(s_u: f64, s_a: f64, i: f64, c: f64, a: f64) -> Self {
        Self { s_u, s_a, i, c, a }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.s_u, self.s_a, self.i, self.c, self.a]
    }

    pub fn from_array(x: [f64; 5]) -> Self {
        Self {
            s_u: x[0],
            s_a: x[1],
            i: x[2],
            c: x[3],
            a: x[4],
        }
    }

    /// Euclidean norm of the 5-vector.
    pub fn norm(&self) -> f64 {
        self.as_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Total infection mass `I + C + A`.
    pub fn infected_mass(&self) -> f64 {
        self.i + self.c + self.a
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("s_u", self.s_u),
            ("s_a", self.s_a),
            ("i", self.i),
            ("c", self.c),
            ("a", self.a),
        ] {
            if value < 0.0 || !value.is_finite() {
                return Err(Error::InvalidValue {
                    name,
                    value,
                    reason: "state components must be nonnegative and finite",
                });
            }
        }
        Ok(())
    }
}

/// Compartment selector, used by histograms and observation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Compartment {
    SU,
    SA,
    I,
    C,
    A,
}

impl Compartment {
    pub const ALL: [Compartment; 5] = [
        Compartment::SU,
        Compartment::SA,
        Compartment::I,
        Compartment::C,
        Compartment::A,
    ];

    pub fn index(self) -> usize {
        match self {
            Compartment::SU => 0,
            Compartment::SA => 1,
            Compartment::I => 2,
            Compartment::C => 3,
            Compartment::A => 4,
        }
    }

    pub fn of(self, x: &State) -> f64 {
        x.as_array()[self.index()]
    }

    /// Column label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            Compartment::SU => "S_u",
            Compartment::SA => "S_a",
            Compartment::I => "I",
            Compartment::C => "C",
            Compartment::A => "A",
        }
    }
}

impl std::str::FromStr for Compartment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "s_u" | "su" => Ok(Compartment::SU),
            "s_a" | "sa" => Ok(Compartment::SA),
            "i" => Ok(Compartment::I),
            "c" => Ok(Compartment::C),
            "a" => Ok(Compartment::A),
            other => Err(format!("unknown compartment `{other}`")),
        }
    }
}

/// Right-hand sides of the five deterministic rate equations at `x`.
pub fn drift(p: &ModelParams, x: &State) -> [f64; 5] {
    let infection_u = p.beta * x.s_u * x.i;
    let infection_a = (1.0 - p.epsilon) * p.beta * x.s_a * x.i;
    [
        p.lambda_recruit - infection_u - (p.alpha + p.mu) * x.s_u,
        p.alpha * x.s_u - infection_a - p.mu * x.s_a,
        infection_u + infection_a + p.eta * x.c + p.nu * x.a - (p.rho + p.gamma + p.mu) * x.i,
        p.rho * x.i - (p.eta + p.mu) * x.c,
        p.gamma * x.i - (p.nu + p.delta + p.mu) * x.a,
    ]
}

/// Multiplicative diffusion coefficients `(sigma_i * x_i)`.
pub fn diffusion(n: &NoiseIntensities, x: &State) -> [f64; 5] {
    let v = x.as_array();
    [
        n.sigma[0] * v[0],
        n.sigma[1] * v[1],
        n.sigma[2] * v[2],
        n.sigma[3] * v[3],
        n.sigma[4] * v[4],
    ]
}

/// Total population `N = S_u + S_a + I + C + A`.
pub fn total_population(x: &State) -> f64 {
    x.s_u + x.s_a + x.i + x.c + x.a
}

/// Whether `x` lies in the deterministic invariant region
/// `0 <= N <= lambda_recruit / mu` (boundary included).
pub fn in_invariant_set(p: &ModelParams, x: &State) -> bool {
    total_population(x) <= p.lambda_recruit / p.mu
}
