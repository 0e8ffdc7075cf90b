use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use reef_mtrl::experiment::{run_evaluation, run_training};
use reef_mtrl::nn::gradcheck_suite;
use reef_mtrl::task::{context_vector, Family, Split};
use reef_mtrl::ExperimentConfig;

#[derive(Parser)]
#[command(name = "reef-mtrl", version, about = "Contextual multi-task DQN experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every configured seed and write metrics, diagnostics and policies.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds overriding the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Output directory overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a saved policy on one split of the config's catalog.
    Eval {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        split: Split,
        #[arg(long, default_value_t = 25)]
        rollouts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the task catalog of a family as JSON.
    Catalog {
        #[arg(long)]
        family: Family,
    },
    /// Compare analytic and finite-difference gradients on random networks.
    Gradcheck {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train { config, seeds, out } => {
            let mut cfg = ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            if let Some(seeds) = seeds {
                cfg.seeds = seeds;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let summary = run_training(&cfg)?;
            for a in &summary.aggregates {
                if a.step == cfg.total_timesteps {
                    println!("step {} {} iqm {:.3}", a.step, a.split, a.iqm);
                }
            }
            println!("artifacts in {}", summary.output_dir.display());
        }
        Command::Eval {
            policy,
            config,
            split,
            rollouts,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let (records, aggregates) = run_evaluation(&policy, &cfg, split, rollouts)
                .with_context(|| format!("evaluating {}", policy.display()))?;
            for r in &records {
                println!("{} {} {:.3} {:.2}", r.seed, r.task_id, r.mean_return, r.success_rate);
            }
            for a in &aggregates {
                println!("{} iqm {:.3}", a.split, a.iqm);
            }
        }
        Command::Catalog { family } => {
            let catalog = ExperimentConfig::new(family, reef_mtrl::Algorithm::Cddqn, 1).catalog()?;
            println!("split\tid\tcontext");
            for task in catalog.train.iter().chain(&catalog.test) {
                let ctx = context_vector(task)?;
                let cells: Vec<String> = ctx.as_slice().iter().map(|v| format!("{v:.3}")).collect();
                println!("{}\t{}\t[{}]", task.split, task.id, cells.join(", "));
            }
            println!("{} train / {} test", catalog.train.len(), catalog.test.len());
        }
        Command::Gradcheck { trials, step, seed } => {
            let report = gradcheck_suite(trials, step, seed)?;
            println!(
                "{} trials, {} skipped near kinks, max relative error {:.3e}",
                report.trials, report.skipped, report.max_error
            );
            if report.max_error >= 1e-4 {
                bail!("gradient check failed");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
