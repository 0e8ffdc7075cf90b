use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use reef_mtrl::env::EnvStep;
use reef_mtrl::eval::{bootstrap_ci, evaluate_suite, iqm, rollout};
use reef_mtrl::nn::Mlp;
use reef_mtrl::reef::{ReefConfig, ReefEnv, REEF_STATE_DIM};
use reef_mtrl::rl::{InputLayout, Policy};
use reef_mtrl::task::{build_catalog, CatalogConfig, Family, Split, TaskSpec};
use reef_mtrl::{Environment, Result};

/// Pays a fixed reward per step for a fixed number of steps.
struct Constant {
    steps: usize,
    left: usize,
}

impl Environment for Constant {
    fn family(&self) -> Family {
        Family::Grid
    }

    fn num_actions(&self) -> usize {
        3
    }

    fn observation_dim(&self) -> usize {
        2
    }

    fn reset(&mut self, _task: &TaskSpec, _seed: u64) -> Result<Vec<f64>> {
        self.left = self.steps;
        Ok(vec![0.0, 1.0])
    }

    fn step(&mut self, _action: usize) -> Result<EnvStep> {
        self.left -= 1;
        Ok(EnvStep {
            observation: vec![0.0, 1.0],
            reward: 2.5,
            terminated: false,
            truncated: self.left == 0,
            success: false,
        })
    }
}

fn grid_policy() -> Policy {
    let layout = InputLayout {
        family: Family::Grid,
        state_dim: 2,
        context_dim: 6,
    };
    Policy::contextual(layout, Mlp::init(&[8, 4, 3], &mut ChaCha8Rng::seed_from_u64(0)).unwrap()).unwrap()
}

#[test]
fn constant_environment_scores_its_constant() {
    let catalog = build_catalog(Family::Grid, &CatalogConfig::default()).unwrap();
    let mut env = Constant { steps: 4, left: 0 };
    let records = evaluate_suite(&mut env, &grid_policy(), &catalog, Split::Train, 25, 0).unwrap();
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r.mean_return == 10.0 && r.success_rate == 0.0));
}

#[test]
fn empty_split_is_an_error() {
    let mut catalog = build_catalog(Family::Grid, &CatalogConfig::default()).unwrap();
    catalog.test.clear();
    let mut env = Constant { steps: 1, left: 0 };
    assert!(evaluate_suite(&mut env, &grid_policy(), &catalog, Split::Test, 1, 0).is_err());
}

#[test]
fn layout_mismatch_is_an_error() {
    let catalog = build_catalog(Family::Reef, &CatalogConfig::default()).unwrap();
    let mut env = ReefEnv::new(ReefConfig::default()).unwrap();
    assert!(rollout(&mut env, &grid_policy(), &catalog.train[0], 0, 0.0).is_err());
}

#[test]
fn reef_suite_is_pure_and_sized() {
    let catalog = build_catalog(Family::Reef, &CatalogConfig::default()).unwrap();
    let layout = InputLayout {
        family: Family::Reef,
        state_dim: REEF_STATE_DIM,
        context_dim: 7,
    };
    let net = Mlp::init(&[50, 16, 5], &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let policy = Policy::contextual(layout, net).unwrap();
    let mut env = ReefEnv::new(ReefConfig::default()).unwrap();
    let a = evaluate_suite(&mut env, &policy, &catalog, Split::Test, 2, 5).unwrap();
    assert_eq!(a.len(), 17);
    assert_eq!(a, evaluate_suite(&mut env, &policy, &catalog, Split::Test, 2, 5).unwrap());
    let r = rollout(&mut env, &policy, &catalog.test[0], 42, 0.0).unwrap();
    assert_eq!(r, rollout(&mut env, &policy, &catalog.test[0], 42, 0.0).unwrap());
}

#[test]
fn bootstrap_coverage_of_true_iqm() {
    // scores ~ N(mu, 1): the population IQM equals mu by symmetry
    let mu = 3.0;
    let trials = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut covered = 0;
    for trial in 0..trials {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..5).map(|_| mu + rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let (lo, hi) = bootstrap_ci(&rows, 1000, 0.95, trial).unwrap();
        let point = iqm(&rows.concat()).unwrap();
        assert!(lo <= point && point <= hi);
        covered += (lo <= mu && mu <= hi) as usize;
    }
    let rate = covered as f64 / trials as f64;
    assert!((0.90..=0.99).contains(&rate), "coverage {rate}");
}
