use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reef_mtrl::grid::{sample_layout, GridAction, GridConfig, GridEnv, LayoutMode, CELL_CHANNELS};
use reef_mtrl::reef::{ReefAction, ReefConfig, ReefEnv, DETECTION_DIM, REEF_STATE_DIM};
use reef_mtrl::task::{build_catalog, CatalogConfig, Family, GridColor, TaskCatalog};
use reef_mtrl::Environment;

fn reef_catalog() -> TaskCatalog {
    build_catalog(Family::Reef, &CatalogConfig::default()).unwrap()
}

fn grid_catalog() -> TaskCatalog {
    build_catalog(Family::Grid, &CatalogConfig::default()).unwrap()
}

#[test]
fn reef_invariants_over_long_random_walks() {
    let catalog = reef_catalog();
    let mut env = ReefEnv::new(ReefConfig::default()).unwrap();
    let d_max = env.config().d_max;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut steps = 0;
    let mut episode = 0;
    while steps < 100_000 {
        let task = &catalog.train[episode % catalog.train.len()];
        env.reset_task(task, episode as u64).unwrap();
        let mut prev_remaining = [1.0; 4];
        loop {
            let action = ReefAction::ALL[rng.gen_range(0..5)];
            let out = env.step_action(action).unwrap();
            steps += 1;
            let s = &out.next_state;
            let r = s.kinematics.rotation();
            assert!((r[0].hypot(r[1]) - 1.0).abs() < 1e-12);
            for i in 0..DETECTION_DIM {
                assert!(s.local_new[i] <= s.local_total[i]);
            }
            for t in 0..4 {
                assert!(s.remaining[t] <= prev_remaining[t] && s.remaining[t] >= 0.0);
            }
            prev_remaining = s.remaining;

            // recount from the organism field
            let pos = s.kinematics.position;
            let in_range = env
                .organisms()
                .iter()
                .filter(|o| (o.position[0] - pos[0]).hypot(o.position[1] - pos[1]) < d_max)
                .count() as u32;
            assert_eq!(in_range, s.local_total.iter().sum::<u32>());
            for t in 0..4 {
                let found = env.organisms().iter().filter(|o| o.discovered && o.kind.index() == t).count();
                assert!((found as f64 - 125.0 * (1.0 - s.remaining[t])).abs() < 1e-9);
            }
            if out.terminated || out.truncated {
                break;
            }
        }
        episode += 1;
    }
}

#[test]
fn reef_replay_is_deterministic() {
    let catalog = reef_catalog();
    let run = || {
        let mut env = ReefEnv::new(ReefConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut obs = vec![env.reset(&catalog.test[3], 77).unwrap()];
        for _ in 0..200 {
            let out = env.step(rng.gen_range(0..5)).unwrap();
            obs.push(out.observation.clone());
            if out.done() {
                break;
            }
        }
        obs
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.iter().all(|o| o.len() == REEF_STATE_DIM));
}

#[test]
fn reef_episode_signs() {
    // failures end below zero, successes above
    let catalog = reef_catalog();
    let mut env = ReefEnv::new(ReefConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for ep in 0..40 {
        env.reset(&catalog.train[ep % 20], ep as u64).unwrap();
        let mut total = 0.0;
        loop {
            // biased towards Forward so many episodes drift out
            let a = if rng.gen_bool(0.7) { 0 } else { rng.gen_range(0..5) };
            let out = env.step(a).unwrap();
            total += out.reward;
            if out.done() {
                if out.terminated && !out.success {
                    assert!(total < 0.0);
                }
                if out.success {
                    assert!(total > 0.0);
                }
                break;
            }
        }
    }
}

fn assert_grid_observation(obs: &[f64], cfg: &GridConfig) {
    assert_eq!(obs.len(), cfg.observation_dim());
    let cells = cfg.window * cfg.window;
    for c in 0..cells {
        let hot: f64 = obs[c * CELL_CHANNELS..(c + 1) * CELL_CHANNELS].iter().sum();
        assert_eq!(hot, 1.0);
    }
    let heading: f64 = obs[cells * CELL_CHANNELS..cells * CELL_CHANNELS + 4].iter().sum();
    assert_eq!(heading, 1.0);
    let remaining = obs[cells * CELL_CHANNELS + 4];
    assert!((0.0..=1.0).contains(&remaining));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn grid_random_walks_stay_well_formed(seed in 0u64..1000, random in any::<bool>(), task in 0usize..6) {
        let cfg = GridConfig::default();
        let mode = if random { LayoutMode::Random } else { LayoutMode::Fixed };
        let catalog = grid_catalog();
        let task = catalog.train.iter().chain(&catalog.test).nth(task).unwrap();
        let mut env = GridEnv::new(cfg.clone(), mode).unwrap();
        let mut obs = env.reset(task, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut steps = 0;
        let mut total = 0.0;
        loop {
            assert_grid_observation(&obs, &cfg);
            let out = env.step(rng.gen_range(0..3)).unwrap();
            steps += 1;
            total += out.reward;
            if out.terminated && !out.success {
                prop_assert_eq!(out.reward, -100.0);
            }
            if out.success {
                prop_assert!(total > 0.0);
            }
            if out.done() {
                break;
            }
            obs = out.observation;
        }
        prop_assert!(steps <= cfg.horizon);
    }

    #[test]
    fn random_layouts_respect_areas(seed in any::<u64>()) {
        let cfg = GridConfig::default();
        let layout = sample_layout(LayoutMode::Random, seed, &cfg).unwrap();
        let mut cells: Vec<_> = layout.organisms.iter().map(|o| o.0).collect();
        cells.sort();
        cells.dedup();
        prop_assert_eq!(cells.len(), layout.organisms.len());
        prop_assert!(!cells.contains(&cfg.start));
        for color in GridColor::ALL {
            let mine: Vec<_> = layout.organisms.iter().filter(|o| o.1 == color).collect();
            prop_assert_eq!(mine.len(), 5);
            let area = &cfg.areas[color.index()];
            prop_assert!(mine.iter().all(|o| area.contains(o.0) && cfg.is_interior(o.0)));
        }
    }
}

#[test]
fn turning_in_place_times_out() {
    let cfg = GridConfig::default();
    let mut env = GridEnv::new(cfg.clone(), LayoutMode::Fixed).unwrap();
    env.reset(&grid_catalog().train[0], 0).unwrap();
    let mut total = 0.0;
    for i in 0..cfg.horizon {
        let out = env.step_action(GridAction::TurnLeft).unwrap();
        total += out.reward;
        assert_eq!(out.truncated, i + 1 == cfg.horizon);
        assert!(!out.terminated);
    }
    assert!((total + 4.0).abs() < 1e-9);
}
