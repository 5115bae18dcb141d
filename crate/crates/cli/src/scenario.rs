//! Scenario files: a TOML document holding parameters, noise intensities,
//! initial state, step configuration, and an optional ensemble section.
//! Unknown and missing keys are rejected at load time.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use hivdyn_core::{EnsembleConfig, ModelParams, NoiseIntensities, State, StepConfig};

/// The ensemble section, combined with the scenario's step configuration
/// into a full [`EnsembleConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_paths: usize,
    pub base_seed: u64,
    pub burn_in: f64,
    #[serde(default = "default_thin")]
    pub thin: usize,
}

fn default_thin() -> usize {
    1
}

/// One fully specified run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    pub params: ModelParams,
    pub noise: NoiseIntensities,
    pub initial: State,
    pub step: StepConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSection>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.params.validate().context("params")?;
        self.noise.validate().context("noise")?;
        self.initial.validate().context("initial")?;
        self.step.validate().context("step")?;
        if let Some(e) = &self.ensemble {
            self.ensemble_config(e).validate().context("ensemble")?;
        }
        Ok(())
    }

    fn ensemble_config(&self, section: &EnsembleSection) -> EnsembleConfig {
        EnsembleConfig {
            n_paths: section.n_paths,
            base_seed: section.base_seed,
            burn_in: section.burn_in,
            step: self.step,
            thin: section.thin,
        }
    }

    /// The ensemble configuration, falling back to a single path seeded from
    /// the step seed when the scenario has no ensemble section.
    pub fn ensemble_or_default(&self) -> EnsembleConfig {
        match &self.ensemble {
            Some(e) => self.ensemble_config(e),
            None => EnsembleConfig {
                n_paths: 1,
                base_seed: self.step.seed,
                burn_in: 0.0,
                step: self.step,
                thin: 1,
            },
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scenario {}", path.display()))?;
    let scenario: Scenario = toml::from_str(&text)
        .with_context(|| format!("parsing scenario {}", path.display()))?;
    scenario
        .validate()
        .with_context(|| format!("validating scenario {}", path.display()))?;
    Ok(scenario)
}
