//! Run configuration: a sampling function plus command parameters.

use std::path::Path;

use anyhow::Context;
use dmspec::SamplingFunction;
use serde::{Deserialize, Serialize};

/// Evenly spaced energies; missing ends default to the spectral hull ± 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    #[serde(default = "default_grid_points")]
    pub points: usize,
}

fn default_grid_points() -> usize {
    dmspec::ids::DEFAULT_GRID_POINTS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommandParams {
    pub max_period: u32,
    pub tol: f64,
    pub grid: Option<GridSpec>,
    pub truncation_size: usize,
    pub samples: usize,
    /// Energies for `rotation`.
    pub energies: Vec<f64>,
    pub omega_samples: usize,
    pub steps: usize,
    pub substeps: usize,
    pub reanchor_every: usize,
    pub depth: usize,
    pub dichotomy_samples: usize,
    pub integrality_tol: f64,
    /// `verify`: a gap longer than this counts as a genuine gap.
    pub gap_threshold: f64,
}

impl Default for CommandParams {
    fn default() -> Self {
        CommandParams {
            max_period: 10,
            tol: 1e-10,
            grid: None,
            truncation_size: 512,
            samples: 64,
            energies: Vec::new(),
            omega_samples: 32,
            steps: 2000,
            substeps: 64,
            reanchor_every: 1,
            depth: 60,
            dichotomy_samples: 200,
            integrality_tol: 0.01,
            gap_threshold: 0.05,
        }
    }
}

/// `{"type": .., <sampling fields>, "seed": .., "base": .., "command": {..}}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub sampling: SamplingFunction,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_base")]
    pub base: u32,
    #[serde(default)]
    pub command: CommandParams,
}

fn default_base() -> u32 {
    2
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sampling: SamplingFunction::constant(0.0),
            seed: 0,
            base: 2,
            command: CommandParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let config: RunConfig = serde_json::from_str(text).context("invalid config JSON")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let c = &self.command;
        anyhow::ensure!(self.base >= 2, "base must be >= 2");
        anyhow::ensure!(c.max_period >= 1, "max_period must be >= 1");
        anyhow::ensure!(c.tol > 0.0, "tol must be positive");
        anyhow::ensure!(c.truncation_size >= 16, "truncation_size must be >= 16");
        anyhow::ensure!(c.samples >= 1, "samples must be >= 1");
        anyhow::ensure!(c.omega_samples >= 1 && c.steps >= 1, "omega_samples and steps must be >= 1");
        anyhow::ensure!(c.substeps >= 8, "substeps must be >= 8");
        anyhow::ensure!(c.reanchor_every >= 1, "reanchor_every must be >= 1");
        anyhow::ensure!(c.depth >= 8, "depth must be >= 8");
        anyhow::ensure!(c.dichotomy_samples >= 1, "dichotomy_samples must be >= 1");
        if let Some(g) = &c.grid {
            anyhow::ensure!(g.points >= 1, "grid needs at least one point");
            if let (Some(lo), Some(hi)) = (g.lo, g.hi) {
                anyhow::ensure!(lo <= hi, "grid lo must not exceed hi");
            }
        }
        Ok(())
    }
}
