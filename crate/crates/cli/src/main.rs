//! Command line front end: loads a scenario file, runs the requested
//! analysis or simulation, and writes machine-readable CSV/JSON artifacts.
//! Human-readable progress goes to stderr; data goes to files or stdout.

mod output;
mod scenario;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hivdyn_core::{
    calibration::{self, FitSpec, FreeParam, ObsRecord, ObsTarget, ObservedSeries},
    ensemble::{self, ParamField},
    equilibria, integrators, Compartment, Scheme, State, ThresholdReport,
};
use scenario::{load_scenario, Scenario};

#[derive(Parser)]
#[command(
    name = "hivdyn",
    about = "Threshold analysis, simulation, and calibration for a five-compartment \
             stochastic HIV/AIDS transmission model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for data files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the scenario's seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread cap for ensemble execution.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print threshold indices and equilibria as JSON.
    Report(Common),
    /// Simulate one trajectory and write it as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Override the scenario's scheme (rk4, em, nptem, pptem).
        #[arg(long)]
        scheme: Option<String>,
    },
    /// Run the scenario's ensemble and write the summary CSV.
    Ensemble(Common),
    /// Empirical marginal histograms of all five compartments.
    Histogram {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        bins: usize,
    },
    /// One ensemble summary per swept parameter value.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to vary (a ModelParams field name).
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
    },
    /// Least-squares fit of freed parameters to an observed series.
    Fit {
        #[command(flatten)]
        common: Common,
        /// CSV with header `time,observed`.
        #[arg(long)]
        series: PathBuf,
        /// Freed parameter with bounds, as `name=lower..upper` (repeatable).
        #[arg(long = "free", required = true)]
        free: Vec<String>,
        /// Forward-simulation step size.
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Observation target: `infected_total` or a compartment name.
        #[arg(long, default_value = "infected_total")]
        target: String,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Report(common) => {
            let s = setup(&common)?;
            cmd_report(&s)
        }
        Command::Simulate { common, scheme } => {
            let s = setup(&common)?;
            cmd_simulate(&s, scheme.as_deref(), &common.out)
        }
        Command::Ensemble(common) => {
            let s = setup(&common)?;
            cmd_ensemble(&s, &common.out)
        }
        Command::Histogram { common, bins } => {
            let s = setup(&common)?;
            cmd_histogram(&s, bins, &common.out)
        }
        Command::Sweep { common, param, values } => {
            let s = setup(&common)?;
            cmd_sweep(&s, &param, &values, &common.out)
        }
        Command::Fit { common, series, free, dt, target } => {
            let s = setup(&common)?;
            cmd_fit(&s, &series, &free, dt, &target)
        }
    }
}

fn setup(common: &Common) -> Result<Scenario> {
    if let Some(workers) = common.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("configuring worker pool")?;
    }
    let mut s = load_scenario(&common.scenario)?;
    if let Some(seed) = common.seed {
        s.step.seed = seed;
        if let Some(e) = &mut s.ensemble {
            e.base_seed = seed;
        }
    }
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating output directory {}", common.out.display()))?;
    Ok(s)
}

#[derive(Serialize)]
struct RunReport<'a> {
    label: &'a str,
    thresholds: ThresholdReport,
    disease_free: State,
    /// Absent when `r0 <= 1`.
    endemic: Option<State>,
}

fn cmd_report(s: &Scenario) -> Result<()> {
    let thresholds = ThresholdReport::compute(&s.params, &s.noise)
        .context("computing threshold report")?;
    let report = RunReport {
        label: &s.label,
        thresholds,
        disease_free: equilibria::disease_free(&s.params),
        endemic: equilibria::endemic_equilibrium(&s.params),
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_simulate(s: &Scenario, scheme: Option<&str>, out: &Path) -> Result<()> {
    let mut cfg = s.step;
    if let Some(name) = scheme {
        cfg.scheme = name.parse::<Scheme>().map_err(anyhow::Error::msg)?;
    }
    let traj = if cfg.scheme == Scheme::Rk4 {
        integrators::rk4_simulate(&s.params, &s.initial, &cfg)
    } else {
        integrators::sde_simulate(&s.params, &s.noise, &s.initial, &cfg)
    }
    .context("simulating trajectory")?;
    let path = out.join("trajectory.csv");
    output::write_trajectory(&path, &traj)?;
    eprintln!(
        "wrote {} ({} points, scheme {})",
        path.display(),
        traj.len(),
        cfg.scheme.name()
    );
    Ok(())
}

fn cmd_ensemble(s: &Scenario, out: &Path) -> Result<()> {
    let cfg = s.ensemble_or_default();
    let summary = ensemble::run_ensemble(&s.params, &s.noise, &s.initial, &cfg)
        .context("running ensemble")?;
    let path = out.join("ensemble.csv");
    output::write_ensemble_summary(&path, &summary)?;
    eprintln!("wrote {} ({} paths)", path.display(), summary.n_paths);
    Ok(())
}

fn cmd_histogram(s: &Scenario, bins: usize, out: &Path) -> Result<()> {
    let cfg = s.ensemble_or_default();
    let trajs = ensemble::run_paths(&s.params, &s.noise, &s.initial, &cfg, |_, traj| {
        traj.clone()
    })
    .context("running ensemble")?;
    for c in Compartment::ALL {
        let hist = ensemble::empirical_distribution(&trajs, c, bins, cfg.burn_in)
            .with_context(|| format!("histogram of {}", c.label()))?;
        let path = out.join(format!("histogram_{}.csv", c.label()));
        output::write_histogram(&path, &hist)?;
        eprintln!(
            "wrote {} ({} samples{})",
            path.display(),
            hist.n_samples,
            if hist.degenerate { ", degenerate" } else { "" }
        );
    }
    Ok(())
}

fn cmd_sweep(s: &Scenario, param: &str, values: &str, out: &Path) -> Result<()> {
    let field = param.parse::<ParamField>().map_err(anyhow::Error::msg)?;
    let values: Vec<f64> = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("parsing value `{v}`")))
        .collect::<Result<_>>()?;
    if values.is_empty() {
        bail!("sweep needs at least one value");
    }
    let cfg = s.ensemble_or_default();
    let summaries = ensemble::sweep(&s.params, &s.noise, &s.initial, &cfg, field, &values)
        .context("running sweep")?;

    let index_path = out.join("sweep_index.csv");
    let mut index = String::from("value,file\n");
    for (k, (value, summary)) in values.iter().zip(&summaries).enumerate() {
        let file = format!("sweep_{}_{:02}.csv", field.name(), k);
        output::write_ensemble_summary(&out.join(&file), summary)?;
        index.push_str(&format!("{value},{file}\n"));
    }
    std::fs::write(&index_path, index)?;
    eprintln!("wrote {} ({} values)", index_path.display(), values.len());
    Ok(())
}

fn parse_free(spec: &str) -> Result<FreeParam> {
    let (name, bounds) = spec
        .split_once('=')
        .with_context(|| format!("expected `name=lower..upper`, got `{spec}`"))?;
    let (lo, hi) = bounds
        .split_once("..")
        .with_context(|| format!("expected `lower..upper` in `{spec}`"))?;
    Ok(FreeParam {
        field: name.parse::<ParamField>().map_err(anyhow::Error::msg)?,
        lower: lo.trim().parse().with_context(|| format!("lower bound in `{spec}`"))?,
        upper: hi.trim().parse().with_context(|| format!("upper bound in `{spec}`"))?,
    })
}

fn load_series(path: &Path, target: ObsTarget) -> Result<ObservedSeries> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading series {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("empty series file")?;
    if header.trim() != "time,observed" {
        bail!("series header must be `time,observed`, got `{header}`");
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (t, v) = line
            .split_once(',')
            .with_context(|| format!("line {}: expected `time,observed`", lineno + 2))?;
        records.push(ObsRecord {
            time: t.trim().parse().with_context(|| format!("line {}: time", lineno + 2))?,
            observed: v.trim().parse().with_context(|| format!("line {}: observed", lineno + 2))?,
            target,
        });
    }
    let series = ObservedSeries { records };
    series.validate()?;
    Ok(series)
}

fn cmd_fit(s: &Scenario, series_path: &Path, free: &[String], dt: f64, target: &str) -> Result<()> {
    let target = match target {
        "infected_total" => ObsTarget::InfectedTotal,
        name => ObsTarget::Compartment(
            name.parse::<Compartment>().map_err(anyhow::Error::msg)?,
        ),
    };
    let series = load_series(series_path, target)?;
    let spec = FitSpec {
        free: free.iter().map(|f| parse_free(f)).collect::<Result<_>>()?,
        fixed: s.params,
        x0: s.initial,
        max_iter: 500,
    };
    let result = calibration::fit(&spec, &series, dt).context("fitting")?;
    println!("fit report");
    println!("  observations: {}", series.records.len());
    for f in &spec.free {
        println!(
            "  {} = {} (bounds {} .. {})",
            f.field.name(),
            f.field.get(&result.params),
            f.lower,
            f.upper
        );
    }
    println!("  objective: {}", result.objective);
    println!("  iterations: {}", result.iterations);
    println!("  converged: {}", result.converged);
    println!("  improved: {}", result.improved);
    Ok(())
}
