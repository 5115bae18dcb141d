//! Monte Carlo ensemble execution and the trajectory statistics behind the
//! persistence, stationarity, and extinction diagnostics: cross-path
//! summaries, time averages, empirical marginal distributions, extinction
//! times, and parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{self, Scheme, StepConfig, Trajectory};
use crate::model::{Compartment, ModelParams, NoiseIntensities, State};

/// Which `ModelParams` field a sweep or fit varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamField {
    LambdaRecruit,
    Beta,
    Mu,
    Delta,
    Alpha,
    Epsilon,
    Eta,
    Nu,
    Gamma,
    Rho,
}

impl ParamField {
    pub const ALL: [ParamField; 10] = [
        ParamField::LambdaRecruit,
        ParamField::Beta,
        ParamField::Mu,
        ParamField::Delta,
        ParamField::Alpha,
        ParamField::Epsilon,
        ParamField::Eta,
        ParamField::Nu,
        ParamField::Gamma,
        ParamField::Rho,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamField::LambdaRecruit => "lambda_recruit",
            ParamField::Beta => "beta",
            ParamField::Mu => "mu",
            ParamField::Delta => "delta",
            ParamField::Alpha => "alpha",
            ParamField::Epsilon => "epsilon",
            ParamField::Eta => "eta",
            ParamField::Nu => "nu",
            ParamField::Gamma => "gamma",
            ParamField::Rho => "rho",
        }
    }

    pub fn get(self, p: &ModelParams) -> f64 {
        match self {
            ParamField::LambdaRecruit => p.lambda_recruit,
            ParamField::Beta => p.beta,
            ParamField::Mu => p.mu,
            ParamField::Delta => p.delta,
            ParamField::Alpha => p.alpha,
            ParamField::Epsilon => p.epsilon,
            ParamField::Eta => p.eta,
            ParamField::Nu => p.nu,
            ParamField::Gamma => p.gamma,
            ParamField::Rho => p.rho,
        }
    }

    pub fn set(self, p: &mut ModelParams, value: f64) {
        match self {
            ParamField::LambdaRecruit => p.lambda_recruit = value,
            ParamField::Beta => p.beta = value,
            ParamField::Mu => p.mu = value,
            ParamField::Delta => p.delta = value,
            ParamField::Alpha => p.alpha = value,
            ParamField::Epsilon => p.epsilon = value,
            ParamField::Eta => p.eta = value,
            ParamField::Nu => p.nu = value,
            ParamField::Gamma => p.gamma = value,
            ParamField::Rho => p.rho = value,
        }
    }
}

impl std::str::FromStr for ParamField {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown parameter `{s}`"))
    }
}

/// Configuration for a Monte Carlo ensemble run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_paths: usize,
    pub base_seed: u64,
    /// Time discarded before stationary statistics are taken.
    pub burn_in: f64,
    pub step: StepConfig,
    /// Record every `thin`-th grid point in summaries (1 keeps every point).
    #[serde(default = "default_thin")]
    pub thin: usize,
}

fn default_thin() -> usize {
    1
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        self.step.validate()?;
        if self.n_paths == 0 {
            return Err(Error::InvalidValue {
                name: "n_paths",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if !(self.burn_in >= 0.0 && self.burn_in < self.step.t_end) {
            return Err(Error::InvalidValue {
                name: "burn_in",
                value: self.burn_in,
                reason: "must lie in [0, t_end)",
            });
        }
        if self.thin == 0 {
            return Err(Error::InvalidValue {
                name: "thin",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }

    /// The step configuration for one path, with its derived seed.
    pub fn path_config(&self, path_index: usize) -> StepConfig {
        StepConfig {
            seed: integrators::derive_seed(self.base_seed, path_index as u64),
            ..self.step
        }
    }
}

/// Per-compartment cross-path statistics on the (possibly thinned) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompartmentSummary {
    pub mean: Vec<f64>,
    pub q05: Vec<f64>,
    pub q25: Vec<f64>,
    pub q50: Vec<f64>,
    pub q75: Vec<f64>,
    pub q95: Vec<f64>,
}

/// Cross-path mean and quantile envelope for each compartment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    pub compartments: [CompartmentSummary; 5],
    pub n_paths: usize,
}

/// The reported quantile levels (the envelope style of the figures).
pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.50, 0.75, 0.95];

/// Linear-interpolation quantile of an unsorted sample.
pub fn quantile(values: &mut [f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in samples"));
    let pos = q * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    values[lo] * (1.0 - frac) + values[hi] * frac
}

/// Run `cfg.n_paths` independent trajectories and map each through `f`,
/// returning results in path order. Parallel over paths; the per-path
/// derived seeds make the output invariant under scheduling.
pub fn run_paths<T, F>(
    p: &ModelParams,
    n: &NoiseIntensities,
    x0: &State,
    cfg: &EnsembleConfig,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &Trajectory) -> T + Sync,
{
    cfg.validate()?;
    (0..cfg.n_paths)
        .into_par_iter()
        .map(|idx| {
            let traj = integrators::sde_simulate(p, n, x0, &cfg.path_config(idx))?;
            Ok(f(idx, &traj))
        })
        .collect()
}

fn thin_indices(len: usize, thin: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).step_by(thin).collect();
    if *idx.last().unwrap() != len - 1 {
        idx.push(len - 1);
    }
    idx
}

/// Cross-path mean and quantiles per compartment per grid point.
pub fn run_ensemble(
    p: &ModelParams,
    n: &NoiseIntensities,
    x0: &State,
    cfg: &EnsembleConfig,
) -> Result<EnsembleSummary> {
    let thin = cfg.thin;
    let paths: Vec<(Vec<f64>, Vec<State>)> = run_paths(p, n, x0, cfg, |_, traj| {
        let keep = thin_indices(traj.len(), thin);
        (
            keep.iter().map(|&k| traj.times[k]).collect(),
            keep.iter().map(|&k| traj.states[k]).collect(),
        )
    })?;

    let times = paths[0].0.clone();
    let n_times = times.len();
    let n_paths = paths.len();
    let mut buffer = vec![0.0; n_paths];
    let compartments = std::array::from_fn(|comp| {
        let mut s = CompartmentSummary {
            mean: Vec::with_capacity(n_times),
            q05: Vec::with_capacity(n_times),
            q25: Vec::with_capacity(n_times),
            q50: Vec::with_capacity(n_times),
            q75: Vec::with_capacity(n_times),
            q95: Vec::with_capacity(n_times),
        };
        for t_idx in 0..n_times {
            for (path_idx, path) in paths.iter().enumerate() {
                buffer[path_idx] = path.1[t_idx].as_array()[comp];
            }
            s.mean.push(buffer.iter().sum::<f64>() / n_paths as f64);
            s.q05.push(quantile(&mut buffer, 0.05));
            s.q25.push(quantile(&mut buffer, 0.25));
            s.q50.push(quantile(&mut buffer, 0.50));
            s.q75.push(quantile(&mut buffer, 0.75));
            s.q95.push(quantile(&mut buffer, 0.95));
        }
        s
    });

    Ok(EnsembleSummary {
        times,
        compartments,
        n_paths,
    })
}

/// Long-run time averages of each compartment over `(burn_in, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAverages {
    pub s_u_bar: f64,
    pub s_a_bar: f64,
    pub i_bar: f64,
    pub c_bar: f64,
    pub a_bar: f64,
}

impl TimeAverages {
    pub fn as_array(&self) -> [f64; 5] {
        [self.s_u_bar, self.s_a_bar, self.i_bar, self.c_bar, self.a_bar]
    }
}

/// Left-rectangle quadrature of each compartment over `(burn_in, t_end]`,
/// divided by the window length.
pub fn time_average(traj: &Trajectory, burn_in: f64) -> TimeAverages {
    let dt = traj.meta.config.dt;
    let t_end = traj.t_end();
    assert!(burn_in >= 0.0 && burn_in < t_end, "burn_in must precede t_end");
    // First grid index at or after burn_in; the last state is a right
    // endpoint only.
    let start = (burn_in / dt).ceil() as usize;
    let mut sums = [0.0; 5];
    for x in &traj.states[start..traj.len() - 1] {
        for (s, v) in sums.iter_mut().zip(x.as_array()) {
            *s += v;
        }
    }
    let window = t_end - traj.times[start];
    let scale = dt / window;
    TimeAverages {
        s_u_bar: sums[0] * scale,
        s_a_bar: sums[1] * scale,
        i_bar: sums[2] * scale,
        c_bar: sums[3] * scale,
        a_bar: sums[4] * scale,
    }
}

/// Density-normalized empirical marginal of one compartment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub variable: Compartment,
    /// `n_bins + 1` boundaries, uniformly spaced.
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub n_samples: usize,
    /// All samples coincided; a single unit-width bin centered on the value.
    pub degenerate: bool,
}

impl Histogram {
    /// The midpoint of the densest bin.
    pub fn mode(&self) -> f64 {
        let (k, _) = self
            .densities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("at least one bin");
        0.5 * (self.edges[k] + self.edges[k + 1])
    }

    pub fn total_mass(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }
}

/// Pool post-burn-in samples across trajectories into a uniform-bin
/// density histogram.
pub fn empirical_distribution(
    trajs: &[Trajectory],
    variable: Compartment,
    n_bins: usize,
    burn_in: f64,
) -> Result<Histogram> {
    assert!(n_bins >= 1);
    let comp = variable.index();
    let mut samples = Vec::new();
    for traj in trajs {
        for (t, x) in traj.times.iter().zip(&traj.states) {
            if *t > burn_in {
                samples.push(x.as_array()[comp]);
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n_samples = samples.len();

    if max == min {
        return Ok(Histogram {
            variable,
            edges: vec![min - 0.5, min + 0.5],
            densities: vec![1.0],
            n_samples,
            degenerate: true,
        });
    }

    let width = (max - min) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for v in &samples {
        let k = (((v - min) / width) as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram {
        variable,
        edges: (0..=n_bins).map(|k| min + k as f64 * width).collect(),
        densities: counts
            .iter()
            .map(|&c| c as f64 / (n_samples as f64 * width))
            .collect(),
        n_samples,
        degenerate: false,
    })
}

/// First grid time with `I + C + A < threshold`, if any. Under the
/// positivity floor of the pptem scheme the mass never drops below `3 dt`,
/// so thresholds at or below that are rejected.
pub fn extinction_time(traj: &Trajectory, threshold: f64) -> Result<Option<f64>> {
    if threshold <= 0.0 || threshold.is_nan() {
        return Err(Error::InvalidValue {
            name: "threshold",
            value: threshold,
            reason: "must be strictly positive",
        });
    }
    let dt = traj.meta.config.dt;
    if traj.meta.config.scheme == Scheme::Pptem && threshold <= 3.0 * dt {
        return Err(Error::ThresholdBelowFloor {
            threshold,
            floor: 3.0 * dt,
        });
    }
    for (t, x) in traj.times.iter().zip(&traj.states) {
        if x.infected_mass() < threshold {
            return Ok(Some(*t));
        }
    }
    Ok(None)
}

/// The exponential decay estimate `(1/t) ln(I + C + A)` at the final time.
pub fn log_decay_rate(traj: &Trajectory) -> Result<f64> {
    let mass = traj.last().infected_mass();
    if mass <= 0.0 {
        return Err(Error::NonpositiveMass);
    }
    Ok(mass.ln() / traj.t_end())
}

/// Each compartment's terminal value divided by the horizon (all five tend
/// to zero almost surely for the model's solutions).
pub fn asymptotic_ratios(traj: &Trajectory) -> [f64; 5] {
    let t = traj.t_end();
    traj.last().as_array().map(|v| v / t)
}

/// One ensemble summary per swept value of `field`, all else fixed; seeds
/// are shared across values so curves differ only through the parameter.
pub fn sweep(
    p: &ModelParams,
    n: &NoiseIntensities,
    x0: &State,
    cfg: &EnsembleConfig,
    field: ParamField,
    values: &[f64],
) -> Result<Vec<EnsembleSummary>> {
    values
        .iter()
        .map(|&v| {
            let mut swept = *p;
            field.set(&mut swept, v);
            swept.validate()?;
            run_ensemble(&swept, n, x0, cfg)
        })
        .collect()
}
