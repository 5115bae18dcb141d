//! Time-stepping engines: classical fourth-order Runge-Kutta for the rate
//! equations, and Euler-Maruyama plus its nonnegativity- and
//! positivity-preserving truncated variants (NPTEM / PPTEM) for the noisy
//! system.
//!
//! The truncation machinery combines three maps applied to the raw
//! Euler-Maruyama increment: a componentwise clamp at zero, a Euclidean-norm
//! truncation at `h(dt) = h_hat * dt^(-1/4)`, and (for PPTEM) a componentwise
//! floor at `dt`.

use std::hash::{Hash, Hasher};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, ModelParams, NoiseIntensities, State};

/// Time-stepping scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rk4,
    Em,
    Nptem,
    Pptem,
}

impl Scheme {
    pub fn is_stochastic(self) -> bool {
        self != Scheme::Rk4
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Rk4 => "rk4",
            Scheme::Em => "em",
            Scheme::Nptem => "nptem",
            Scheme::Pptem => "pptem",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(Scheme::Rk4),
            "em" => Ok(Scheme::Em),
            "nptem" => Ok(Scheme::Nptem),
            "pptem" => Ok(Scheme::Pptem),
            other => Err(format!("unknown scheme `{other}`")),
        }
    }
}

/// Step size, horizon, seed, and scheme for one simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(Error::InvalidValue {
                name: "dt",
                value: self.dt,
                reason: "must be strictly positive",
            });
        }
        if self.t_end < self.dt || !self.t_end.is_finite() {
            return Err(Error::InvalidValue {
                name: "t_end",
                value: self.t_end,
                reason: "must be at least dt",
            });
        }
        // h(dt) = h_hat * dt^(-1/4) is defined on (0, 1].
        if matches!(self.scheme, Scheme::Nptem | Scheme::Pptem) && self.dt > 1.0 {
            return Err(Error::InvalidValue {
                name: "dt",
                value: self.dt,
                reason: "truncated schemes require dt in (0, 1]",
            });
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

/// Norm-truncation bound for one run: `h_hat = max(1, |x0|)` and
/// `h_delta = h_hat * dt^(-1/4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationContext {
    pub h_hat: f64,
    pub h_delta: f64,
}

impl TruncationContext {
    pub fn new(x0: &State, dt: f64) -> Self {
        Self::with_h_hat(x0.norm().max(1.0), dt)
    }

    /// Explicit bound, used by tests to activate the truncation at desk
    /// scale (with realistic populations `h_hat ~ 1e8` makes it inert).
    pub fn with_h_hat(h_hat: f64, dt: f64) -> Self {
        Self {
            h_hat,
            h_delta: h_hat * dt.powf(-0.25),
        }
    }
}

/// Provenance carried by every trajectory: the step configuration plus a
/// fingerprint of the parameter and noise values that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub config: StepConfig,
    pub fingerprint: u64,
}

pub fn fingerprint(p: &ModelParams, n: &NoiseIntensities) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for v in [
        p.lambda_recruit,
        p.beta,
        p.mu,
        p.delta,
        p.alpha,
        p.epsilon,
        p.eta,
        p.nu,
        p.gamma,
        p.rho,
    ] {
        v.to_bits().hash(&mut h);
    }
    for v in n.sigma {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

/// A uniform time grid and the recorded state at each grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("nonempty grid")
    }
}

/// Componentwise clamp at zero (the map `pi_hat_0`).
pub fn clamp_nonneg(x: [f64; 5]) -> [f64; 5] {
    x.map(|v| v.max(0.0))
}

/// Euclidean-norm truncation (the map `pi_Delta`): rescale onto the ball of
/// radius `h_delta`, leaving shorter vectors untouched. The zero vector maps
/// to itself (the only continuous extension of `x / |x|`).
pub fn truncate_norm(x: [f64; 5], ctx: &TruncationContext) -> [f64; 5] {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= ctx.h_delta {
        x
    } else {
        let scale = ctx.h_delta / norm;
        x.map(|v| v * scale)
    }
}

/// Componentwise floor at `dt` (the map `pi_hat_Delta`); output is strictly
/// positive.
pub fn floor_delta(x: [f64; 5], dt: f64) -> State {
    State::from_array(x.map(|v| v.max(dt)))
}

/// The drift split of the truncated schemes: `f1` collects recruitment and
/// the linear transfer terms evaluated through the zero clamp at `x_bar`;
/// `f2` collects the bilinear infection terms evaluated at `x_trunc`.
pub fn drift_split(p: &ModelParams, x_bar: &State, x_trunc: &State) -> ([f64; 5], [f64; 5]) {
    let [s_u, s_a, i, c, a] = clamp_nonneg(x_bar.as_array());
    let f1 = [
        p.lambda_recruit - (p.alpha + p.mu) * s_u,
        p.alpha * s_u - p.mu * s_a,
        p.eta * c + p.nu * a - (p.rho + p.gamma + p.mu) * i,
        p.rho * i - (p.eta + p.mu) * c,
        p.gamma * i - (p.nu + p.delta + p.mu) * a,
    ];

    let t = x_trunc.as_array();
    let clamp = |v: f64| v.max(0.0);
    // The first two infection terms clamp the product, the third clamps the
    // factors, following the discretization display verbatim.
    let f2 = [
        -p.beta * clamp(t[0] * t[2]),
        -(1.0 - p.epsilon) * p.beta * clamp(t[1] * t[2]),
        p.beta * clamp(t[2]) * (clamp(t[0]) + (1.0 - p.epsilon) * clamp(t[1])),
        0.0,
        0.0,
    ];
    (f1, f2)
}

/// Output of one truncated Euler-Maruyama step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeStep {
    /// The unconstrained intermediate iterate.
    pub x_bar: State,
    /// Clamp-then-truncate output (nonnegative, norm-bounded).
    pub nptem: State,
    /// Floor-then-truncate output (componentwise at least `dt`).
    pub pptem: State,
}

/// One step of the truncated recursion: advance `x_bar` with
/// `f1(x_bar) + f2(x_trunc)` and diffusion `sigma_i * clamp(x_bar_i)`,
/// then apply the NPTEM and PPTEM output maps.
pub fn sde_step(
    p: &ModelParams,
    n: &NoiseIntensities,
    x_bar: &State,
    x_trunc: &State,
    dt: f64,
    ctx: &TruncationContext,
    noise: [f64; 5],
) -> Result<SdeStep> {
    let (f1, f2) = drift_split(p, x_bar, x_trunc);
    let clamped = clamp_nonneg(x_bar.as_array());
    let sqrt_dt = dt.sqrt();
    let prev = x_bar.as_array();
    let mut next = [0.0; 5];
    for k in 0..5 {
        let g = n.sigma[k] * clamped[k];
        next[k] = prev[k] + (f1[k] + f2[k]) * dt + g * sqrt_dt * noise[k];
        if !next[k].is_finite() {
            return Err(Error::StepOverflow { step: 0 });
        }
    }
    let truncated = truncate_norm(next, ctx);
    Ok(SdeStep {
        x_bar: State::from_array(next),
        nptem: State::from_array(clamp_nonneg(truncated)),
        pptem: floor_delta(truncated, dt),
    })
}

/// Deterministic rate-equation trajectory via classical RK4; the seed in
/// `cfg` is ignored.
pub fn rk4_simulate(p: &ModelParams, x0: &State, cfg: &StepConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let n_steps = cfg.n_steps();
    let dt = cfg.dt;
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut x = x0.as_array();
    states.push(State::from_array(x));

    for step in 0..n_steps {
        let k1 = model::drift(p, &State::from_array(x));
        let mid1: [f64; 5] = std::array::from_fn(|j| x[j] + 0.5 * dt * k1[j]);
        let k2 = model::drift(p, &State::from_array(mid1));
        let mid2: [f64; 5] = std::array::from_fn(|j| x[j] + 0.5 * dt * k2[j]);
        let k3 = model::drift(p, &State::from_array(mid2));
        let end: [f64; 5] = std::array::from_fn(|j| x[j] + dt * k3[j]);
        let k4 = model::drift(p, &State::from_array(end));
        for j in 0..5 {
            x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            if !x[j].is_finite() {
                return Err(Error::StepOverflow { step });
            }
        }
        states.push(State::from_array(x));
    }

    Ok(Trajectory {
        times: (0..=n_steps).map(|k| k as f64 * dt).collect(),
        states,
        meta: TrajectoryMeta {
            config: *cfg,
            fingerprint: fingerprint(p, &NoiseIntensities::ZERO),
        },
    })
}

/// Counter-derived per-path seed, so that ensembles are reproducible
/// independently of execution order.
pub fn derive_seed(base_seed: u64, path_index: u64) -> u64 {
    // splitmix64 over the (base, index) pair.
    let mut z = base_seed ^ path_index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The per-trajectory noise stream: five standard-normal draws per step,
/// consumed in fixed compartment order.
pub fn path_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn draw_noise(rng: &mut ChaCha12Rng) -> [f64; 5] {
    std::array::from_fn(|_| StandardNormal.sample(rng))
}

/// Stochastic trajectory under the scheme in `cfg` (`em`, `nptem`, or
/// `pptem`), fully determined by the inputs including the seed.
pub fn sde_simulate(
    p: &ModelParams,
    n: &NoiseIntensities,
    x0: &State,
    cfg: &StepConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let n_steps = cfg.n_steps();
    let dt = cfg.dt;
    let mut rng = path_rng(cfg.seed);
    let meta = TrajectoryMeta {
        config: *cfg,
        fingerprint: fingerprint(p, n),
    };
    let mut states = Vec::with_capacity(n_steps + 1);

    match cfg.scheme {
        Scheme::Rk4 => {
            return Err(Error::InvalidValue {
                name: "scheme",
                value: 0.0,
                reason: "sde_simulate requires a stochastic scheme",
            })
        }
        Scheme::Em => {
            // Plain Euler-Maruyama: the truncated recursion with every
            // truncation map replaced by the identity.
            let mut x = *x0;
            states.push(x);
            let sqrt_dt = dt.sqrt();
            for step in 0..n_steps {
                let d = model::drift(p, &x);
                let g = model::diffusion(n, &x);
                let r = draw_noise(&mut rng);
                let mut next = x.as_array();
                for k in 0..5 {
                    next[k] += d[k] * dt + g[k] * sqrt_dt * r[k];
                    if !next[k].is_finite() {
                        return Err(Error::StepOverflow { step });
                    }
                }
                x = State::from_array(next);
                states.push(x);
            }
        }
        Scheme::Nptem | Scheme::Pptem => {
            let ctx = TruncationContext::new(x0, dt);
            let mut x_bar = *x0;
            let mut x_trunc = *x0;
            // The recorded state is the scheme's output map applied at each
            // grid point, including t0.
            let initial = truncate_norm(x0.as_array(), &ctx);
            states.push(match cfg.scheme {
                Scheme::Pptem => floor_delta(initial, dt),
                _ => State::from_array(clamp_nonneg(initial)),
            });
            for step in 0..n_steps {
                let r = draw_noise(&mut rng);
                let out = sde_step(p, n, &x_bar, &x_trunc, dt, &ctx, r)
                    .map_err(|_| Error::StepOverflow { step })?;
                x_bar = out.x_bar;
                x_trunc = out.nptem;
                states.push(match cfg.scheme {
                    Scheme::Pptem => out.pptem,
                    _ => out.nptem,
                });
            }
        }
    }

    Ok(Trajectory {
        times: (0..=n_steps).map(|k| k as f64 * dt).collect(),
        states,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria;
    use rand::Rng;

    fn indonesia() -> ModelParams {
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

    fn indonesia_x0() -> State {
        State::new(129_789_089.0, 100_000_000.0, 7_195.0, 0.0, 3_716.0)
    }

    #[test]
    fn step_config_validation() {
        let ok = StepConfig { dt: 0.01, t_end: 1.0, seed: 0, scheme: Scheme::Pptem };
        ok.validate().unwrap();
        let bad_dt = StepConfig { dt: 0.0, ..ok };
        assert!(bad_dt.validate().is_err());
        let bad_horizon = StepConfig { dt: 0.5, t_end: 0.1, ..ok };
        assert!(bad_horizon.validate().is_err());
        let big_dt_truncated = StepConfig { dt: 1.5, t_end: 10.0, ..ok };
        assert!(big_dt_truncated.validate().is_err());
        let big_dt_em = StepConfig { dt: 1.5, t_end: 10.0, scheme: Scheme::Em, ..ok };
        big_dt_em.validate().unwrap();
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(
            clamp_nonneg([-1.0, 2.0, -3.0, 0.0, 5.0]),
            [0.0, 2.0, 0.0, 0.0, 5.0]
        );
        assert_eq!(clamp_nonneg([1.0, 2.0, 3.0, 4.0, 5.0]), [1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(clamp_nonneg([-1.0; 5]), [0.0; 5]);
    }

    #[test]
    fn floor_examples() {
        assert_eq!(floor_delta([0.0; 5], 0.01).as_array(), [0.01; 5]);
        assert_eq!(
            floor_delta([1.0, 2.0, 3.0, 4.0, 5.0], 0.01).as_array(),
            [1.0, 2.0, 3.0, 4.0, 5.0]
        );
        assert_eq!(
            floor_delta([0.005, 5.0, 0.02, 0.0, 1.0], 0.01).as_array(),
            [0.01, 5.0, 0.02, 0.01, 1.0]
        );
    }

    #[test]
    fn norm_truncation_branches() {
        let ctx = TruncationContext::with_h_hat(5.0, 1.0);
        assert_eq!(ctx.h_delta, 5.0);
        let short = [1.0, 2.0, 0.0, 0.0, 0.0];
        assert_eq!(truncate_norm(short, &ctx), short);
        // |x| = 10 = 2 * h_delta -> x / 2.
        let long = [6.0, 8.0, 0.0, 0.0, 0.0];
        assert_eq!(truncate_norm(long, &ctx), [3.0, 4.0, 0.0, 0.0, 0.0]);
        assert_eq!(truncate_norm([0.0; 5], &ctx), [0.0; 5]);
    }

    #[test]
    fn truncation_context_bounds() {
        let x0 = indonesia_x0();
        let ctx = TruncationContext::new(&x0, 0.01);
        assert!(ctx.h_hat >= 1.0);
        assert!(ctx.h_delta >= ctx.h_hat);
        let unit = TruncationContext::new(&State::ZERO, 0.5);
        assert_eq!(unit.h_hat, 1.0);
    }

    #[test]
    fn drift_split_infection_terms_vanish_without_infected() {
        let p = indonesia();
        let x = State::new(1.0e8, 5.0e7, 0.0, 10.0, 20.0);
        let (_, f2) = drift_split(&p, &x, &x);
        assert_eq!(f2, [0.0; 5]);
    }

    #[test]
    fn drift_split_balances_at_disease_free_point() {
        let p = indonesia();
        let dfe = equilibria::disease_free(&p);
        let (f1, f2) = drift_split(&p, &dfe, &dfe);
        for k in 0..5 {
            assert!((f1[k] + f2[k]).abs() <= 8.0 * p.lambda_recruit * f64::EPSILON);
        }
    }

    #[test]
    fn drift_split_clamps_negative_components() {
        let p = indonesia();
        let dirty = State::new(-5.0, 2.0e7, -1.0, 10.0, -0.5);
        let clean = State::from_array(clamp_nonneg(dirty.as_array()));
        // f2's argument is always a truncated (nonnegative) state in the
        // recursion, so idempotence is asserted on the f1 argument only.
        assert_eq!(drift_split(&p, &dirty, &clean), drift_split(&p, &clean, &clean));
    }

    #[test]
    fn noise_free_step_is_forward_euler() {
        let p = indonesia();
        let x = State::new(1.0e8, 8.0e7, 2.0e7, 3.0e4, 2.0e6);
        let dt = 0.01;
        let ctx = TruncationContext::with_h_hat(1e12, dt);
        let out = sde_step(&p, &NoiseIntensities::ZERO, &x, &x, dt, &ctx, [0.0; 5]).unwrap();
        let d = model::drift(&p, &x);
        for (k, dk) in d.iter().enumerate() {
            let euler = x.as_array()[k] + dk * dt;
            let diff = (out.x_bar.as_array()[k] - euler).abs();
            assert!(diff <= 4.0 * euler.abs() * f64::EPSILON, "component {k}");
        }
    }

    #[test]
    fn negative_increment_hits_clamp_and_floor() {
        let p = indonesia();
        let dt = 0.01;
        let ctx = TruncationContext::with_h_hat(1e12, dt);
        // Tiny I with a strong negative shock drives the I component below 0.
        let x = State::new(1.0e4, 1.0e4, 0.5, 0.0, 0.0);
        let n = NoiseIntensities::uniform(1.0);
        let out = sde_step(&p, &n, &x, &x, dt, &ctx, [0.0, 0.0, -50.0, 0.0, 0.0]).unwrap();
        assert!(out.x_bar.i < 0.0);
        assert_eq!(out.nptem.i, 0.0);
        assert_eq!(out.pptem.i, dt);
    }

    #[test]
    fn norm_bound_applies_to_truncated_outputs() {
        let p = indonesia();
        let dt = 0.01;
        let ctx = TruncationContext::with_h_hat(1.0, dt); // h_delta ~ 3.16
        let x = State::new(50.0, 50.0, 50.0, 1.0, 1.0);
        let out = sde_step(&p, &NoiseIntensities::ZERO, &x, &x, dt, &ctx, [0.0; 5]).unwrap();
        assert!(out.x_bar.norm() > ctx.h_delta);
        assert!(out.nptem.norm() <= ctx.h_delta * (1.0 + 4.0 * f64::EPSILON));
    }

    #[test]
    fn rk4_stays_at_disease_free_point() {
        let p = indonesia();
        let dfe = equilibria::disease_free(&p);
        let cfg = StepConfig { dt: 0.05, t_end: 10.0, seed: 0, scheme: Scheme::Rk4 };
        let traj = rk4_simulate(&p, &dfe, &cfg).unwrap();
        for x in &traj.states {
            for (got, want) in x.as_array().iter().zip(dfe.as_array()) {
                if want > 0.0 {
                    assert!((got - want).abs() / want < 1e-10);
                }
            }
        }
    }

    #[test]
    fn rk4_conserves_population_without_vital_dynamics() {
        let mut p = indonesia();
        p.lambda_recruit = 0.0;
        p.mu = 0.0;
        p.delta = 0.0;
        let x0 = State::new(100.0, 50.0, 20.0, 5.0, 2.0);
        let cfg = StepConfig { dt: 0.01, t_end: 50.0, seed: 0, scheme: Scheme::Rk4 };
        let traj = rk4_simulate(&p, &x0, &cfg).unwrap();
        let n0 = model::total_population(&x0);
        for x in &traj.states {
            assert!((model::total_population(x) - n0).abs() / n0 < 1e-9);
        }
    }

    #[test]
    fn rk4_converges_to_endemic_point() {
        // The slowest components pass 1% relative distance around t ~ 320,
        // so the check runs to t = 400.
        let p = indonesia();
        let p_star = equilibria::endemic_equilibrium(&p).unwrap();
        let cfg = StepConfig { dt: 0.01, t_end: 400.0, seed: 0, scheme: Scheme::Rk4 };
        let traj = rk4_simulate(&p, &indonesia_x0(), &cfg).unwrap();
        for (got, want) in traj.last().as_array().iter().zip(p_star.as_array()) {
            assert!((got - want).abs() / want < 0.01, "{got} vs {want}");
        }
    }

    #[test]
    fn noise_free_trajectories_coincide_across_schemes() {
        let p = indonesia();
        // Every component well above dt, so the pptem floor stays inactive.
        let x0 = State::new(129_789_089.0, 100_000_000.0, 7_195.0, 5_000.0, 3_716.0);
        let cfg = |scheme| StepConfig { dt: 0.01, t_end: 5.0, seed: 9, scheme };
        let em = sde_simulate(&p, &NoiseIntensities::ZERO, &x0, &cfg(Scheme::Em)).unwrap();
        let np = sde_simulate(&p, &NoiseIntensities::ZERO, &x0, &cfg(Scheme::Nptem)).unwrap();
        let pp = sde_simulate(&p, &NoiseIntensities::ZERO, &x0, &cfg(Scheme::Pptem)).unwrap();
        for k in 0..em.len() {
            for j in 0..5 {
                let a = em.states[k].as_array()[j];
                let b = np.states[k].as_array()[j];
                let c = pp.states[k].as_array()[j];
                let tol = 4.0 * (k as f64 + 1.0) * a.abs().max(1.0) * f64::EPSILON;
                assert!((a - b).abs() <= tol);
                assert!((a - c).abs() <= tol);
            }
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let p = indonesia();
        let n = NoiseIntensities::uniform(0.05);
        let cfg = StepConfig { dt: 0.01, t_end: 2.0, seed: 1234, scheme: Scheme::Pptem };
        let a = sde_simulate(&p, &n, &indonesia_x0(), &cfg).unwrap();
        let b = sde_simulate(&p, &n, &indonesia_x0(), &cfg).unwrap();
        assert_eq!(a, b);
        let other_seed = StepConfig { seed: 1235, ..cfg };
        let c = sde_simulate(&p, &n, &indonesia_x0(), &other_seed).unwrap();
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn pptem_respects_positivity_floor() {
        let p = indonesia();
        let n = NoiseIntensities::uniform(0.05);
        let cfg = StepConfig { dt: 0.01, t_end: 20.0, seed: 7, scheme: Scheme::Pptem };
        let traj = sde_simulate(&p, &n, &indonesia_x0(), &cfg).unwrap();
        for x in &traj.states {
            for v in x.as_array() {
                assert!(v >= cfg.dt);
            }
        }
    }

    #[test]
    fn nptem_states_are_nonnegative() {
        let p = indonesia();
        let n = NoiseIntensities::uniform(0.05);
        let cfg = StepConfig { dt: 0.01, t_end: 20.0, seed: 7, scheme: Scheme::Nptem };
        let traj = sde_simulate(&p, &n, &indonesia_x0(), &cfg).unwrap();
        let ctx = TruncationContext::new(&indonesia_x0(), cfg.dt);
        for x in &traj.states {
            for v in x.as_array() {
                assert!(v >= 0.0);
            }
            assert!(x.norm() <= ctx.h_delta * (1.0 + 4.0 * f64::EPSILON));
        }
    }

    #[test]
    fn noise_stream_moments() {
        let dt = 0.01_f64;
        let mut rng = path_rng(derive_seed(99, 0));
        let n_draws = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n_draws {
            let r: f64 = StandardNormal.sample(&mut rng);
            let incr = dt.sqrt() * r;
            sum += incr;
            sum_sq += incr * incr;
        }
        let mean = sum / n_draws as f64;
        let var = sum_sq / n_draws as f64 - mean * mean;
        let se = (dt / n_draws as f64).sqrt();
        assert!(mean.abs() <= 4.0 * se, "mean {mean} vs se {se}");
        assert!((var - dt).abs() / dt <= 0.05, "var {var}");
    }

    #[test]
    fn derived_seeds_differ_across_paths() {
        let mut seen = std::collections::HashSet::new();
        for idx in 0..1000 {
            assert!(seen.insert(derive_seed(42, idx)));
        }
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }

    #[test]
    fn em_overflow_reports_step_index() {
        // Explosive parameters with a huge step blow up quickly under EM.
        let p = ModelParams {
            lambda_recruit: 1.0,
            beta: 10.0,
            mu: 1e-6,
            delta: 1e-6,
            alpha: 1e-6,
            epsilon: 0.5,
            eta: 1e-6,
            nu: 1e-6,
            gamma: 1e-6,
            rho: 1e-6,
        };
        let x0 = State::new(1e150, 1e150, 1e150, 0.0, 0.0);
        let cfg = StepConfig { dt: 1000.0, t_end: 100_000.0, seed: 0, scheme: Scheme::Em };
        match sde_simulate(&p, &NoiseIntensities::ZERO, &x0, &cfg) {
            Err(Error::StepOverflow { .. }) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_em_matches_handwritten_euler() {
        // The discretization's term ordering, written out longhand.
        let p = indonesia();
        let mut rng = path_rng(5);
        for _ in 0..200 {
            let x = State::new(
                rng.gen_range(0.0..1e8),
                rng.gen_range(0.0..1e8),
                rng.gen_range(0.0..1e7),
                rng.gen_range(0.0..1e5),
                rng.gen_range(0.0..1e6),
            );
            let dt = 0.01;
            let ctx = TruncationContext::with_h_hat(1e12, dt);
            let out = sde_step(&p, &NoiseIntensities::ZERO, &x, &x, dt, &ctx, [0.0; 5]).unwrap();
            let [s_u, s_a, i, c, a] = x.as_array();
            let expected = [
                s_u + (p.lambda_recruit - (p.alpha + p.mu) * s_u - p.beta * (s_u * i)) * dt,
                s_a + (p.alpha * s_u - p.mu * s_a - (1.0 - p.epsilon) * p.beta * (s_a * i)) * dt,
                i + (p.eta * c + p.nu * a - (p.rho + p.gamma + p.mu) * i
                    + p.beta * i * (s_u + (1.0 - p.epsilon) * s_a))
                    * dt,
                c + (p.rho * i - (p.eta + p.mu) * c) * dt,
                a + (p.gamma * i - (p.nu + p.delta + p.mu) * a) * dt,
            ];
            for (k, want) in expected.iter().enumerate() {
                let got = out.x_bar.as_array()[k];
                assert!((got - want).abs() <= 4.0 * want.abs() * f64::EPSILON);
            }
        }
    }
}
