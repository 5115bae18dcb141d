//! Least-squares parameter fitting against yearly case counts, by forward
//! RK4 simulation of the rate equations and a bounded derivative-free
//! simplex search over the freed parameters.

use serde::{Deserialize, Serialize};

use crate::ensemble::ParamField;
use crate::error::{Error, Result};
use crate::integrators::{self, Scheme, StepConfig, Trajectory};
use crate::model::{Compartment, ModelParams, State};

/// What a single observation measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObsTarget {
    /// One compartment.
    Compartment(Compartment),
    /// The sum `I + C + A` (total cases under surveillance).
    InfectedTotal,
}

impl ObsTarget {
    pub fn of(self, x: &State) -> f64 {
        match self {
            ObsTarget::Compartment(c) => c.of(x),
            ObsTarget::InfectedTotal => x.infected_mass(),
        }
    }
}

/// One observation record: years since simulation start and the count seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObsRecord {
    pub time: f64,
    pub observed: f64,
    pub target: ObsTarget,
}

/// Observed yearly counts, strictly increasing in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedSeries {
    pub records: Vec<ObsRecord>,
}

impl ObservedSeries {
    pub fn validate(&self) -> Result<()> {
        for w in self.records.windows(2) {
            if w[1].time <= w[0].time {
                return Err(Error::InvalidValue {
                    name: "time",
                    value: w[1].time,
                    reason: "observation times must be strictly increasing",
                });
            }
        }
        for r in &self.records {
            if r.observed < 0.0 || !r.observed.is_finite() {
                return Err(Error::InvalidValue {
                    name: "observed",
                    value: r.observed,
                    reason: "must be nonnegative and finite",
                });
            }
            if r.time < 0.0 || !r.time.is_finite() {
                return Err(Error::InvalidValue {
                    name: "time",
                    value: r.time,
                    reason: "must be nonnegative and finite",
                });
            }
        }
        Ok(())
    }

    pub fn t_max(&self) -> f64 {
        self.records.last().map(|r| r.time).unwrap_or(0.0)
    }
}

/// One freed parameter with its box bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParam {
    pub field: ParamField,
    pub lower: f64,
    pub upper: f64,
}

/// Which parameters the search varies, their bounds, and the fixed rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub free: Vec<FreeParam>,
    pub fixed: ModelParams,
    pub x0: State,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_max_iter() -> usize {
    500
}

impl FitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.free.is_empty() {
            return Err(Error::NoFreeParameters);
        }
        for f in &self.free {
            if !f.lower.is_finite() || !f.upper.is_finite() || f.lower >= f.upper {
                return Err(Error::InvalidValue {
                    name: "bounds",
                    value: f.lower,
                    reason: "lower bound must be below upper bound",
                });
            }
        }
        for pair in 0..self.free.len() {
            for later in pair + 1..self.free.len() {
                if self.free[pair].field == self.free[later].field {
                    return Err(Error::InvalidValue {
                        name: "free",
                        value: pair as f64,
                        reason: "parameter freed twice",
                    });
                }
            }
        }
        self.x0.validate()
    }

    fn params_at(&self, point: &[f64]) -> ModelParams {
        let mut p = self.fixed;
        for (f, &v) in self.free.iter().zip(point) {
            f.field.set(&mut p, v);
        }
        p
    }

    fn project(&self, point: &mut [f64]) {
        for (f, v) in self.free.iter().zip(point.iter_mut()) {
            *v = v.clamp(f.lower, f.upper);
        }
    }
}

/// Sum of squared residuals between the RK4 forward simulation and the
/// observations, with linear interpolation at observation times.
pub fn objective(
    p: &ModelParams,
    series: &ObservedSeries,
    x0: &State,
    dt: f64,
) -> Result<f64> {
    series.validate()?;
    let t_end = series.t_max().max(dt);
    let cfg = StepConfig {
        dt,
        t_end,
        seed: 0,
        scheme: Scheme::Rk4,
    };
    let traj = integrators::rk4_simulate(p, x0, &cfg)?;
    let mut total = 0.0;
    for r in &series.records {
        let model = interpolate(&traj, r.time, r.target);
        let resid = model - r.observed;
        total += resid * resid;
    }
    Ok(total)
}

fn interpolate(traj: &Trajectory, t: f64, target: ObsTarget) -> f64 {
    let dt = traj.meta.config.dt;
    let pos = t / dt;
    let lo = (pos.floor() as usize).min(traj.len() - 1);
    let hi = (lo + 1).min(traj.len() - 1);
    let frac = (pos - lo as f64).clamp(0.0, 1.0);
    let a = target.of(&traj.states[lo]);
    let b = target.of(&traj.states[hi]);
    a + frac * (b - a)
}

/// Result of one bounded search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ModelParams,
    pub objective: f64,
    pub iterations: usize,
    /// Best objective after each accepted improvement, starting from the
    /// initial point; never increasing.
    pub trace: Vec<f64>,
    /// False when the budget ran out before the relative-improvement stop.
    pub converged: bool,
    /// False when no point beat the initial midpoint (the result then is
    /// the initial point itself).
    pub improved: bool,
}

const REL_TOL: f64 = 1e-8;

/// Nelder-Mead over the free-parameter box, started at the box midpoint,
/// bounds enforced by projection. Deterministic given spec and series.
pub fn fit(spec: &FitSpec, series: &ObservedSeries, dt: f64) -> Result<FitResult> {
    spec.validate()?;
    series.validate()?;
    let dim = spec.free.len();
    if series.records.len() < dim {
        return Err(Error::TooFewObservations {
            need: dim,
            got: series.records.len(),
        });
    }

    let eval = |point: &[f64]| -> Result<f64> {
        objective(&spec.params_at(point), series, &spec.x0, dt)
    };

    // Initial simplex: box midpoint plus one vertex offset per dimension.
    let midpoint: Vec<f64> = spec
        .free
        .iter()
        .map(|f| 0.5 * (f.lower + f.upper))
        .collect();
    let initial_value = eval(&midpoint)?;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((midpoint.clone(), initial_value));
    for k in 0..dim {
        let mut v = midpoint.clone();
        v[k] += 0.25 * (spec.free[k].upper - spec.free[k].lower);
        spec.project(&mut v);
        let fv = eval(&v)?;
        simplex.push((v, fv));
    }

    let mut trace = vec![initial_value];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < spec.max_iter {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if (worst - best).abs() <= REL_TOL * (best.abs() + REL_TOL) {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for (v, _) in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }

        let blend = |t: f64| -> Vec<f64> {
            let mut v: Vec<f64> = centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            spec.project(&mut v);
            v
        };

        let reflected = blend(1.0);
        let f_reflected = eval(&reflected)?;
        if f_reflected < simplex[0].1 {
            let expanded = blend(2.0);
            let f_expanded = eval(&expanded)?;
            simplex[dim] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < simplex[dim - 1].1 {
            simplex[dim] = (reflected, f_reflected);
        } else {
            let contracted = if f_reflected < simplex[dim].1 {
                blend(0.5)
            } else {
                blend(-0.5)
            };
            let f_contracted = eval(&contracted)?;
            if f_contracted < simplex[dim].1.min(f_reflected) {
                simplex[dim] = (contracted, f_contracted);
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[0].0.clone();
                for (v, fv) in &mut simplex[1..] {
                    for (x, a) in v.iter_mut().zip(&anchor) {
                        *x = a + 0.5 * (*x - a);
                    }
                    spec.project(v);
                    *fv = eval(v)?;
                }
            }
        }

        let current_best = simplex
            .iter()
            .map(|(_, f)| *f)
            .fold(f64::INFINITY, f64::min);
        if current_best < *trace.last().unwrap() {
            trace.push(current_best);
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
    let (best_point, best_value) = simplex.swap_remove(0);
    let improved = best_value < initial_value;
    let (point, value) = if improved {
        (best_point, best_value)
    } else {
        (midpoint, initial_value)
    };
    Ok(FitResult {
        params: spec.params_at(&point),
        objective: value,
        iterations,
        trace,
        converged,
        improved,
    })
}
