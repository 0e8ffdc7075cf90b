//! Family-agnostic environment interface used by trainers and evaluation.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::task::{Family, TaskSpec};

/// One transition as seen by a learner.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// Episode ended by success or failure; bootstrapping stops here.
    pub terminated: bool,
    /// Episode ended by the horizon; bootstrapping continues.
    pub truncated: bool,
    pub success: bool,
}

impl EnvStep {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// A CMDP family whose member MDP is selected by the task passed to `reset`.
pub trait Environment {
    fn family(&self) -> Family;
    fn num_actions(&self) -> usize;
    fn observation_dim(&self) -> usize;
    fn reset(&mut self, task: &TaskSpec, seed: u64) -> Result<Vec<f64>>;
    fn step(&mut self, action: usize) -> Result<EnvStep>;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn family(&self) -> Family {
        (**self).family()
    }

    fn num_actions(&self) -> usize {
        (**self).num_actions()
    }

    fn observation_dim(&self) -> usize {
        (**self).observation_dim()
    }

    fn reset(&mut self, task: &TaskSpec, seed: u64) -> Result<Vec<f64>> {
        (**self).reset(task, seed)
    }

    fn step(&mut self, action: usize) -> Result<EnvStep> {
        (**self).step(action)
    }
}

/// Writes trajectory rows as CSV with a header taken from the row type's fields.
pub fn write_trajectory<W: Write, R: Serialize>(writer: W, rows: &[R]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush().map_err(|e| crate::Error::io("<trajectory>", e))?;
    Ok(())
}
