//! Training and evaluation runs that write the on-disk artifacts.
//!
//! Layout of a training run:
//!
//! ```text
//! <output_dir>/config.resolved.json
//! <output_dir>/metrics.csv          every seed, every checkpoint, both splits
//! <output_dir>/aggregate.json       IQM and bootstrap interval per checkpoint
//! <output_dir>/seed_<s>/diagnostics.csv
//! <output_dir>/seed_<s>/metrics.csv
//! <output_dir>/seed_<s>/policy.json
//! <output_dir>/seed_<s>/experts/expert_<k>.json   mixture runs only
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::config::{Algorithm, ExperimentConfig, MoeBudget};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::eval::{aggregate, evaluate_suite, write_aggregate_json, write_metrics_csv, Aggregate, EvalRecord};
use crate::nn::Mlp;
use crate::rl::{InputLayout, Policy, Trainer};
use crate::seed::{derive_seed, tags};
use crate::task::{Split, TaskCatalog};

pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.json";
pub const METRICS_FILE: &str = "metrics.csv";
pub const AGGREGATE_FILE: &str = "aggregate.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const POLICY_FILE: &str = "policy.json";

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub records: Vec<EvalRecord>,
    pub aggregates: Vec<Aggregate>,
    /// Final policy per seed, in config order.
    pub policies: Vec<Policy>,
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn seed_dir(output_dir: &Path, seed: u64) -> PathBuf {
    output_dir.join(format!("seed_{seed}"))
}

/// Evaluation steps: 0, every `interval`, and the final step.
pub fn checkpoints(total: u64, interval: u64) -> Vec<u64> {
    let mut steps: Vec<u64> = (0..total).step_by(interval as usize).collect();
    steps.push(total);
    steps
}

/// Trains every configured seed and writes all artifacts under
/// `config.output_dir`. The config is validated before anything is written.
pub fn run_training(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    let out = config.output_dir.clone();
    create_dir(&out)?;
    let resolved = serde_json::to_string_pretty(&config.resolved())?;
    let path = out.join(RESOLVED_CONFIG_FILE);
    fs::write(&path, resolved).map_err(|e| Error::io(&path, e))?;
    let catalog = config.catalog()?;

    // Seeds go to a bounded pool; results land in config order.
    let results: Mutex<Vec<Option<Result<(Vec<EvalRecord>, Policy)>>>> =
        Mutex::new((0..config.seeds.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..config.workers.min(config.seeds.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= config.seeds.len() {
                    break;
                }
                let r = run_seed(config, &catalog, config.seeds[i]);
                results.lock().expect("no worker panics while holding the lock")[i] = Some(r);
            });
        }
    });

    let mut records = Vec::new();
    let mut policies = Vec::new();
    for r in results.into_inner().expect("workers joined") {
        let (recs, policy) = r.expect("every seed ran")?;
        records.extend(recs);
        policies.push(policy);
    }
    write_metrics_csv(out.join(METRICS_FILE), &records)?;
    let aggregates = aggregate(&records, config.eval.rollouts, &config.eval.bootstrap)?;
    write_aggregate_json(out.join(AGGREGATE_FILE), &aggregates)?;
    Ok(RunSummary {
        output_dir: out,
        records,
        aggregates,
        policies,
    })
}

fn evaluate_checkpoint(
    env: &mut dyn Environment,
    policy: &Policy,
    catalog: &TaskCatalog,
    config: &ExperimentConfig,
    seed: u64,
    step: u64,
) -> Result<Vec<EvalRecord>> {
    let mut out = Vec::new();
    for split in [Split::Train, Split::Test] {
        for mut r in evaluate_suite(env, policy, catalog, split, config.eval.rollouts, seed)? {
            r.step = step;
            out.push(r);
        }
    }
    Ok(out)
}

fn run_seed(config: &ExperimentConfig, catalog: &TaskCatalog, seed: u64) -> Result<(Vec<EvalRecord>, Policy)> {
    let dir = seed_dir(&config.output_dir, seed);
    create_dir(&dir)?;
    let diag_path = dir.join(DIAGNOSTICS_FILE);
    let mut diagnostics = csv::Writer::from_path(&diag_path)?;
    let mut eval_env = config.make_env()?;
    let steps = checkpoints(config.total_timesteps, config.eval_interval());
    let mut records = Vec::new();

    let policy = match config.algorithm {
        Algorithm::Cddqn => {
            let mut trainer = Trainer::new(
                config.make_env()?,
                catalog.train.clone(),
                true,
                &config.hidden(),
                config.dqn.clone(),
                config.total_timesteps,
                seed,
            )?;
            for &step in &steps {
                for row in trainer.train_steps(step - trainer.steps())? {
                    diagnostics.serialize(row)?;
                }
                let policy = trainer.policy()?;
                records.extend(evaluate_checkpoint(eval_env.as_mut(), &policy, catalog, config, seed, step)?);
            }
            trainer.policy()?
        }
        Algorithm::Moe => {
            let experts_dir = dir.join("experts");
            create_dir(&experts_dir)?;
            let k = catalog.train.len() as u64;
            let budget = match config.moe_budget {
                MoeBudget::Shared => (config.total_timesteps / k).max(1),
                MoeBudget::Full => config.total_timesteps,
            };
            // expert-local step matching each global checkpoint
            let local: Vec<u64> = steps
                .iter()
                .map(|&s| (s as u128 * budget as u128 / config.total_timesteps as u128) as u64)
                .collect();
            let mut snapshots: Vec<Vec<Mlp>> = vec![Vec::new(); steps.len()];
            for (e, task) in catalog.train.iter().enumerate() {
                let mut trainer = Trainer::new(
                    config.make_env()?,
                    vec![task.clone()],
                    false,
                    &config.hidden(),
                    config.dqn.clone(),
                    budget,
                    derive_seed(seed, tags::EXPERT, e as u64),
                )?;
                for (c, &l) in local.iter().enumerate() {
                    for row in trainer.train_steps(l - trainer.steps())? {
                        diagnostics.serialize(row)?;
                    }
                    snapshots[c].push(trainer.online().clone());
                }
                trainer.policy()?.save(experts_dir.join(format!("expert_{e:02}.json")))?;
            }
            let layout = InputLayout {
                family: config.family,
                state_dim: eval_env.observation_dim(),
                context_dim: config.family.context_dim(),
            };
            let mut last = None;
            for (nets, &step) in snapshots.into_iter().zip(&steps) {
                let policy = Policy::mixture(layout, catalog.train.iter().cloned().zip(nets).collect())?;
                records.extend(evaluate_checkpoint(eval_env.as_mut(), &policy, catalog, config, seed, step)?);
                last = Some(policy);
            }
            last.expect("at least one checkpoint")
        }
    };
    diagnostics.flush().map_err(|e| Error::io(&diag_path, e))?;
    write_metrics_csv(dir.join(METRICS_FILE), &records)?;
    policy.save(dir.join(POLICY_FILE))?;
    Ok((records, policy))
}

/// Re-evaluates a saved policy on one split for every configured seed and
/// writes `eval_<split>.csv` and `eval_<split>.json` to `config.output_dir`.
pub fn run_evaluation(
    policy_path: &Path,
    config: &ExperimentConfig,
    split: Split,
    rollouts: usize,
) -> Result<(Vec<EvalRecord>, Vec<Aggregate>)> {
    config.validate()?;
    let policy = Policy::load(policy_path)?;
    if policy.layout().family != config.family {
        return Err(Error::Incompatible(format!(
            "policy is for the {} family but the config is {}",
            policy.layout().family,
            config.family
        )));
    }
    let catalog = config.catalog()?;
    let mut env = config.make_env()?;
    let mut records = Vec::new();
    for &seed in &config.seeds {
        records.extend(evaluate_suite(env.as_mut(), &policy, &catalog, split, rollouts, seed)?);
    }
    let aggregates = aggregate(&records, rollouts, &config.eval.bootstrap)?;
    create_dir(&config.output_dir)?;
    write_metrics_csv(config.output_dir.join(format!("eval_{split}.csv")), &records)?;
    write_aggregate_json(config.output_dir.join(format!("eval_{split}.json")), &aggregates)?;
    Ok((records, aggregates))
}
