//! Experiment configuration: one JSON document, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::eval::BootstrapConfig;
use crate::grid::{GridConfig, GridEnv, LayoutMode};
use crate::reef::{ReefConfig, ReefEnv};
use crate::rl::DqnConfig;
use crate::task::{build_catalog, CatalogConfig, Family, TaskCatalog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// One network fed `state ++ context`, trained on all tasks.
    Cddqn,
    /// One context-blind expert per training task.
    Moe,
}

/// How many environment steps each mixture expert gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoeBudget {
    /// `total_timesteps / number of experts`, matching the contextual run's
    /// total experience.
    Shared,
    /// `total_timesteps` each.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Steps between evaluation checkpoints; family default when absent.
    pub interval: Option<u64>,
    pub rollouts: usize,
    pub bootstrap: BootstrapConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            interval: None,
            rollouts: 25,
            bootstrap: BootstrapConfig::default(),
        }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

fn default_workers() -> usize {
    1
}

fn default_budget() -> MoeBudget {
    MoeBudget::Shared
}

fn default_mode() -> LayoutMode {
    LayoutMode::Fixed
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    pub algorithm: Algorithm,
    pub total_timesteps: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Hidden widths; 128,128 for reef and 32,32 for grid when absent.
    #[serde(default)]
    pub hidden: Option<Vec<usize>>,
    #[serde(default = "default_mode")]
    pub grid_mode: LayoutMode,
    #[serde(default = "default_budget")]
    pub moe_budget: MoeBudget,
    #[serde(default)]
    pub reef: ReefConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub dqn: DqnConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Seeds trained concurrently.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ExperimentConfig {
    /// Minimal config with every knob at its default.
    pub fn new(family: Family, algorithm: Algorithm, total_timesteps: u64) -> Self {
        ExperimentConfig {
            family,
            algorithm,
            total_timesteps,
            seeds: default_seeds(),
            hidden: None,
            grid_mode: default_mode(),
            moe_budget: default_budget(),
            reef: ReefConfig::default(),
            grid: GridConfig::default(),
            dqn: DqnConfig::default(),
            eval: EvalConfig::default(),
            output_dir: default_output(),
            workers: default_workers(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid experiment config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.total_timesteps == 0 {
            return bad("total_timesteps must be positive".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if self.hidden().contains(&0) {
            return bad("hidden widths must be positive".into());
        }
        if self.eval.rollouts == 0 || self.eval.interval == Some(0) {
            return bad("eval rollouts and interval must be positive".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        self.dqn.validate()?;
        match self.family {
            Family::Reef => self.reef.validate(),
            Family::Grid => self.grid.validate(),
        }
    }

    pub fn hidden(&self) -> Vec<usize> {
        self.hidden.clone().unwrap_or_else(|| match self.family {
            Family::Reef => vec![128, 128],
            Family::Grid => vec![32, 32],
        })
    }

    pub fn eval_interval(&self) -> u64 {
        self.eval.interval.unwrap_or(match (self.family, self.grid_mode) {
            (Family::Reef, _) => 10_000,
            (Family::Grid, LayoutMode::Fixed) => 25_000,
            (Family::Grid, LayoutMode::Random) => 100_000,
        })
    }

    /// Copy with every family-dependent default written out.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.hidden = Some(self.hidden());
        c.eval.interval = Some(self.eval_interval());
        c
    }

    pub fn catalog(&self) -> Result<TaskCatalog> {
        build_catalog(
            self.family,
            &CatalogConfig {
                current_magnitude: self.reef.current_magnitude,
            },
        )
    }

    pub fn make_env(&self) -> Result<Box<dyn Environment + Send>> {
        Ok(match self.family {
            Family::Reef => Box::new(ReefEnv::new(self.reef.clone())?),
            Family::Grid => Box::new(GridEnv::new(self.grid.clone(), self.grid_mode)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let c = ExperimentConfig::from_json(r#"{"family":"grid","algorithm":"cddqn","total_timesteps":5000}"#).unwrap();
        assert_eq!(c.hidden(), vec![32, 32]);
        assert_eq!(c.eval_interval(), 25_000);
        assert_eq!(c.dqn.batch_size, 64);
        assert_eq!(c.resolved().hidden, Some(vec![32, 32]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            r#"{"family":"grid","algorithm":"cddqn","total_timesteps":5,"gama":0.9}"#,
            r#"{"family":"grid","algorithm":"cddqn","total_timesteps":5,"dqn":{"gama":0.9}}"#,
            r#"{"family":"reef","algorithm":"moe","total_timesteps":5,"reef":{"dmax":2}}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut c = ExperimentConfig::new(Family::Reef, Algorithm::Moe, 10);
        assert!(c.validate().is_ok());
        c.seeds.clear();
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(Family::Reef, Algorithm::Moe, 0);
        assert!(c.validate().is_err());
        c.total_timesteps = 1;
        c.dqn.gamma = 1.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn resolved_snapshot_round_trips() {
        let c = ExperimentConfig::new(Family::Reef, Algorithm::Cddqn, 100).resolved();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
    }
}
