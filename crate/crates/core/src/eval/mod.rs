//! Rollouts, per-task scores, and seed-level aggregation.

mod stats;

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use stats::{bootstrap_ci, iqm};

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::rl::Policy;
use crate::seed::{derive_seed, rng_for, tags};
use crate::task::{context_vector, Split, TaskCatalog, TaskSpec};

/// Undiscounted return and success flag of one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutResult {
    pub episode_return: f64,
    pub success: bool,
}

/// Runs one episode to termination or truncation. Actions are greedy except
/// with probability `epsilon`, where they are uniform; pass 0 for a greedy
/// evaluation.
pub fn rollout<E: Environment + ?Sized>(
    env: &mut E,
    policy: &Policy,
    task: &TaskSpec,
    seed: u64,
    epsilon: f64,
) -> Result<RolloutResult> {
    let layout = policy.layout();
    if layout.family != task.family || env.family() != task.family || layout.state_dim != env.observation_dim() {
        return Err(Error::Incompatible(format!(
            "{} policy over {} states cannot run task `{}` in a {} environment with {} states",
            layout.family,
            layout.state_dim,
            task.id,
            env.family(),
            env.observation_dim()
        )));
    }
    let context = context_vector(task)?;
    let mut rng = rng_for(seed, tags::EXPLORE, 0);
    let mut obs = env.reset(task, seed)?;
    let mut total = 0.0;
    loop {
        let action = if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
            rng.gen_range(0..env.num_actions())
        } else {
            policy.act_greedy(&obs, &context)?
        };
        let out = env.step(action)?;
        total += out.reward;
        if out.done() {
            return Ok(RolloutResult {
                episode_return: total,
                success: out.success,
            });
        }
        obs = out.observation;
    }
}

/// Mean greedy performance on one task at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub step: u64,
    pub seed: u64,
    pub task_id: String,
    pub split: Split,
    pub mean_return: f64,
    pub success_rate: f64,
}

/// Greedy evaluation of every task in a split, `n_rollouts` episodes each.
///
/// Episode seeds derive from `seed` and the task's position, so the result is
/// a pure function of the arguments. Records carry `step = 0`; callers stamp
/// the checkpoint.
pub fn evaluate_suite<E: Environment + ?Sized>(
    env: &mut E,
    policy: &Policy,
    catalog: &TaskCatalog,
    split: Split,
    n_rollouts: usize,
    seed: u64,
) -> Result<Vec<EvalRecord>> {
    let tasks = catalog.split(split);
    if tasks.is_empty() {
        return Err(Error::Empty("evaluation split"));
    }
    if n_rollouts == 0 {
        return Err(Error::Config("n_rollouts must be at least 1".into()));
    }
    let stream = format!("{}/{split}", tags::EVAL);
    tasks
        .iter()
        .enumerate()
        .map(|(t, task)| {
            let mut total = 0.0;
            let mut successes = 0;
            for k in 0..n_rollouts {
                let episode_seed = derive_seed(seed, &stream, (t * n_rollouts + k) as u64);
                let r = rollout(env, policy, task, episode_seed, 0.0)?;
                total += r.episode_return;
                successes += r.success as usize;
            }
            Ok(EvalRecord {
                step: 0,
                seed,
                task_id: task.id.clone(),
                split,
                mean_return: total / n_rollouts as f64,
                success_rate: successes as f64 / n_rollouts as f64,
            })
        })
        .collect()
}

/// Seeds × tasks matrix of mean returns at one checkpoint and split.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub seeds: Vec<u64>,
    pub task_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    /// Collects the records of `(step, split)`. Every seed must have a score
    /// for every task.
    pub fn from_records(records: &[EvalRecord], step: u64, split: Split) -> Result<Self> {
        let mut cells: BTreeMap<u64, BTreeMap<&str, f64>> = BTreeMap::new();
        for r in records.iter().filter(|r| r.step == step && r.split == split) {
            cells.entry(r.seed).or_default().insert(&r.task_id, r.mean_return);
        }
        let Some(first) = cells.values().next() else {
            return Err(Error::Empty("score matrix"));
        };
        let task_ids: Vec<String> = first.keys().map(|k| k.to_string()).collect();
        let mut rows = Vec::new();
        for (seed, row) in &cells {
            if row.len() != task_ids.len() || task_ids.iter().any(|t| !row.contains_key(t.as_str())) {
                return Err(Error::Shape(format!("seed {seed} is missing tasks at step {step} ({split})")));
            }
            rows.push(task_ids.iter().map(|t| row[t.as_str()]).collect());
        }
        Ok(ScoreMatrix {
            seeds: cells.keys().copied().collect(),
            task_ids,
            rows,
        })
    }

    pub fn iqm(&self) -> Result<f64> {
        iqm(&self.rows.concat())
    }
}

/// Summary of one checkpoint and split. The interval is absent with a single
/// seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub step: u64,
    pub split: Split,
    pub iqm: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub n_seeds: usize,
    pub n_tasks: usize,
    pub n_rollouts: usize,
}

/// Bootstrap settings for [`aggregate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: 2000,
            level: 0.95,
            seed: 0,
        }
    }
}

/// One [`Aggregate`] per (step, split) present in `records`, ordered by step
/// then split.
pub fn aggregate(records: &[EvalRecord], n_rollouts: usize, bootstrap: &BootstrapConfig) -> Result<Vec<Aggregate>> {
    let mut keys: Vec<(u64, Split)> = records.iter().map(|r| (r.step, r.split)).collect();
    keys.sort_by_key(|&(s, sp)| (s, sp == Split::Test));
    keys.dedup();
    keys.into_iter()
        .map(|(step, split)| {
            let m = ScoreMatrix::from_records(records, step, split)?;
            let ci = if m.rows.len() >= 2 {
                let (lo, hi) = bootstrap_ci(&m.rows, bootstrap.resamples, bootstrap.level, bootstrap.seed)?;
                (Some(lo), Some(hi))
            } else {
                (None, None)
            };
            Ok(Aggregate {
                step,
                split,
                iqm: m.iqm()?,
                ci_lo: ci.0,
                ci_hi: ci.1,
                n_seeds: m.rows.len(),
                n_tasks: m.task_ids.len(),
                n_rollouts,
            })
        })
        .collect()
}

pub fn write_metrics_csv(path: impl AsRef<Path>, records: &[EvalRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_metrics_csv(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_aggregate_json(path: impl AsRef<Path>, aggregates: &[Aggregate]) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(aggregates)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(step: u64, seed: u64, task: &str, split: Split, v: f64) -> EvalRecord {
        EvalRecord {
            step,
            seed,
            task_id: task.into(),
            split,
            mean_return: v,
            success_rate: 0.0,
        }
    }

    #[test]
    fn matrix_requires_every_task() {
        let mut recs = vec![
            record(5, 0, "a", Split::Train, 1.0),
            record(5, 0, "b", Split::Train, 2.0),
            record(5, 1, "a", Split::Train, 3.0),
        ];
        assert!(ScoreMatrix::from_records(&recs, 5, Split::Train).is_err());
        recs.push(record(5, 1, "b", Split::Train, 4.0));
        let m = ScoreMatrix::from_records(&recs, 5, Split::Train).unwrap();
        assert_eq!(m.rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!((m.iqm().unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn aggregate_orders_and_omits_single_seed_interval() {
        let recs = vec![
            record(10, 0, "a", Split::Test, 1.0),
            record(10, 0, "a", Split::Train, 2.0),
            record(0, 0, "a", Split::Train, 3.0),
        ];
        let agg = aggregate(&recs, 25, &BootstrapConfig::default()).unwrap();
        let keys: Vec<_> = agg.iter().map(|a| (a.step, a.split)).collect();
        assert_eq!(keys, vec![(0, Split::Train), (10, Split::Train), (10, Split::Test)]);
        assert!(agg.iter().all(|a| a.ci_lo.is_none() && a.n_seeds == 1));
    }

    #[test]
    fn csv_header_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let recs = vec![record(1, 2, "N-red", Split::Train, -0.5)];
        write_metrics_csv(&path, &recs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("step,seed,task_id,split,mean_return,success_rate\n1,2,N-red,train,"));
        assert_eq!(read_metrics_csv(&path).unwrap(), recs);
    }
}
