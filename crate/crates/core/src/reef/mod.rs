//! Continuous planar reef-monitoring environment.
//!
//! A kinematic AUV starts at the origin of a field of organisms of four types.
//! The task context sets the water current and which types count as
//! interesting. The episode succeeds once every interesting organism has been
//! detected and fails once the vehicle strays `d_fail` metres from the start.

pub mod detect;
pub mod dynamics;
pub mod reward;

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use detect::{detect, scan, Detection, Organism, Quadrant, DETECTION_DIM};
pub use dynamics::{apply_dynamics, DynamicsParams, Kinematics};
pub use reward::{classify, reward, step_reward, RewardCase, RewardParams};

use crate::env::{EnvStep, Environment};
use crate::error::{Error, Result};
use crate::task::{Family, OrganismType, TaskSpec, REEF_TYPES};

/// Length of the reef state vector: position, rotation, velocity, time,
/// remaining fractions, local totals, local new counts.
pub const REEF_STATE_DIM: usize = 2 + 2 + 2 + 1 + REEF_TYPES + DETECTION_DIM + DETECTION_DIM;
pub const REEF_ACTIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReefAction {
    Forward = 0,
    TurnRight = 1,
    TurnLeft = 2,
    Backward = 3,
    NoOp = 4,
}

impl ReefAction {
    pub const ALL: [ReefAction; REEF_ACTIONS] = [
        ReefAction::Forward,
        ReefAction::TurnRight,
        ReefAction::TurnLeft,
        ReefAction::Backward,
        ReefAction::NoOp,
    ];

    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL.get(index).copied().ok_or(Error::ActionOutOfRange {
            index,
            len: REEF_ACTIONS,
        })
    }
}

/// Tunable constants of the reef environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReefConfig {
    /// Control interval in seconds (2 Hz).
    pub dt: f64,
    pub v_cmd: f64,
    pub yaw_rate_deg: f64,
    pub alpha: f64,
    pub d_max: f64,
    pub d_fail: f64,
    /// Episode horizon in control steps.
    pub horizon: u32,
    pub r_success: f64,
    pub r_fail: f64,
    pub r_new: f64,
    pub r_penalty: f64,
    pub organisms_per_type: usize,
    /// Inner and outer radius of the annular placement sectors, in metres.
    pub placement_radii: [f64; 2],
    pub v_scale: f64,
    pub count_scale: f64,
    /// Speed of every non-zero catalog current in m/s.
    pub current_magnitude: f64,
}

impl Default for ReefConfig {
    fn default() -> Self {
        ReefConfig {
            dt: 0.5,
            v_cmd: 1.0,
            yaw_rate_deg: 30.0,
            alpha: 0.7,
            d_max: 2.5,
            d_fail: 10.0,
            horizon: 600,
            r_success: 1000.0,
            r_fail: -1000.0,
            r_new: 1.0,
            r_penalty: 0.1,
            organisms_per_type: 125,
            placement_radii: [2.0, 9.0],
            v_scale: 1.0,
            count_scale: 10.0,
            current_magnitude: 0.2,
        }
    }
}

impl ReefConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("v_cmd", self.v_cmd),
            ("yaw_rate_deg", self.yaw_rate_deg),
            ("d_max", self.d_max),
            ("d_fail", self.d_fail),
            ("v_scale", self.v_scale),
            ("count_scale", self.count_scale),
            ("current_magnitude", self.current_magnitude),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("reef.{name} must be positive, got {value}")));
            }
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("reef.alpha must lie in [0, 1), got {}", self.alpha)));
        }
        if self.horizon == 0 || self.organisms_per_type == 0 {
            return Err(Error::Config("reef.horizon and reef.organisms_per_type must be positive".into()));
        }
        let [inner, outer] = self.placement_radii;
        if !(inner >= 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::Config(format!("reef.placement_radii must satisfy 0 <= inner < outer, got {:?}", self.placement_radii)));
        }
        Ok(())
    }

    pub fn dynamics(&self) -> DynamicsParams {
        DynamicsParams {
            v_cmd: self.v_cmd,
            yaw_rate: self.yaw_rate_deg.to_radians(),
            alpha: self.alpha,
        }
    }

    pub fn rewards(&self) -> RewardParams {
        RewardParams {
            r_success: self.r_success,
            r_fail: self.r_fail,
            r_new: self.r_new,
            r_penalty: self.r_penalty,
            d_fail: self.d_fail,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReefState {
    pub kinematics: Kinematics,
    /// Elapsed time in seconds.
    pub time: f64,
    /// Fraction of each type still undiscovered.
    pub remaining: [f64; REEF_TYPES],
    pub local_total: [u32; DETECTION_DIM],
    pub local_new: [u32; DETECTION_DIM],
}

/// Normalized state vector, see [`REEF_STATE_DIM`] for the layout.
///
/// Positions are divided by `d_fail`, velocities by `v_scale`, time by the
/// episode duration and counts by `count_scale`.
pub fn state_vector(state: &ReefState, config: &ReefConfig) -> Vec<f64> {
    let mut out = Vec::with_capacity(REEF_STATE_DIM);
    let k = &state.kinematics;
    out.extend(k.position.iter().map(|x| x / config.d_fail));
    out.extend(k.rotation());
    out.extend(k.velocity.iter().map(|v| v / config.v_scale));
    out.push(state.time / (config.horizon as f64 * config.dt));
    out.extend(state.remaining);
    out.extend(state.local_total.iter().map(|&c| c as f64 / config.count_scale));
    out.extend(state.local_new.iter().map(|&c| c as f64 / config.count_scale));
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub success: bool,
    pub failure: bool,
    pub new_detections_per_type: [u32; REEF_TYPES],
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: ReefState,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

/// Places `per_type` organisms of each type uniformly (by area) in that type's
/// 90 degree annular sector. Red occupies [0, 90) degrees, blue [90, 180),
/// green [180, 270), black [270, 360).
pub fn place_organisms(per_type: usize, radii: [f64; 2], seed: u64) -> Vec<Organism> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [inner, outer] = radii;
    let mut organisms = Vec::with_capacity(per_type * REEF_TYPES);
    for kind in OrganismType::ALL {
        let start = kind.index() as f64 * FRAC_PI_2;
        for _ in 0..per_type {
            let angle = start + rng.gen::<f64>() * FRAC_PI_2;
            let radius = (inner * inner + rng.gen::<f64>() * (outer * outer - inner * inner)).sqrt();
            organisms.push(Organism {
                position: [radius * angle.cos(), radius * angle.sin()],
                kind,
                discovered: false,
            });
        }
    }
    organisms
}

/// One reef episode at a time.
#[derive(Debug, Clone)]
pub struct ReefEnv {
    config: ReefConfig,
    task: Option<TaskSpec>,
    organisms: Vec<Organism>,
    totals: [u32; REEF_TYPES],
    undiscovered: [u32; REEF_TYPES],
    state: ReefState,
    origin: [f64; 2],
    steps: u32,
    done: bool,
}

impl ReefEnv {
    pub fn new(config: ReefConfig) -> Result<Self> {
        config.validate()?;
        Ok(ReefEnv {
            config,
            task: None,
            organisms: Vec::new(),
            totals: [0; REEF_TYPES],
            undiscovered: [0; REEF_TYPES],
            state: ReefState {
                kinematics: Kinematics::at_rest([0.0; 2], 0.0),
                time: 0.0,
                remaining: [1.0; REEF_TYPES],
                local_total: [0; DETECTION_DIM],
                local_new: [0; DETECTION_DIM],
            },
            origin: [0.0; 2],
            steps: 0,
            done: true,
        })
    }

    pub fn config(&self) -> &ReefConfig {
        &self.config
    }

    pub fn state(&self) -> &ReefState {
        &self.state
    }

    pub fn organisms(&self) -> &[Organism] {
        &self.organisms
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Starts an episode of `task`. The organism field depends only on `seed`.
    ///
    /// The initial observation comes from a detector pass at the origin that
    /// does not latch discoveries, so nothing counts as found before the first
    /// action.
    pub fn reset_task(&mut self, task: &TaskSpec, seed: u64) -> Result<&ReefState> {
        if task.family != Family::Reef {
            return Err(Error::InvalidTask(format!("{} is not a reef task", task.id)));
        }
        task.validate()?;
        self.organisms = place_organisms(self.config.organisms_per_type, self.config.placement_radii, seed);
        self.totals = [self.config.organisms_per_type as u32; REEF_TYPES];
        self.undiscovered = self.totals;
        self.origin = [0.0; 2];
        let kinematics = Kinematics::at_rest(self.origin, 0.0);
        let preview = scan(kinematics.position, kinematics.rotation(), &self.organisms, self.config.d_max);
        self.state = ReefState {
            kinematics,
            time: 0.0,
            remaining: [1.0; REEF_TYPES],
            local_total: preview.local_total,
            local_new: preview.local_new,
        };
        self.task = Some(task.clone());
        self.steps = 0;
        self.done = false;
        Ok(&self.state)
    }

    pub fn step_action(&mut self, action: ReefAction) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        let task = self.task.as_ref().ok_or(Error::EpisodeFinished)?;
        let cfg = &self.config;
        let current = [task.current[0], task.current[1]];
        let kinematics = apply_dynamics(&self.state.kinematics, action, current, &cfg.dynamics(), cfg.dt);
        let detection = detect(kinematics.position, kinematics.rotation(), &mut self.organisms, cfg.d_max);
        let new_per_type = detection.new_per_type();
        let mut remaining = [0.0; REEF_TYPES];
        for i in 0..REEF_TYPES {
            self.undiscovered[i] -= new_per_type[i];
            remaining[i] = self.undiscovered[i] as f64 / self.totals[i] as f64;
        }
        self.steps += 1;
        let next = ReefState {
            kinematics,
            time: self.steps as f64 * cfg.dt,
            remaining,
            local_total: detection.local_total,
            local_new: detection.local_new,
        };
        let params = cfg.rewards();
        let case = reward::classify(&next, task, self.origin, &params);
        let value = reward(&self.state, &next, &detection.local_new, task, self.origin, &params);
        let success = case == reward::RewardCase::Success;
        let failure = case == reward::RewardCase::Failure;
        let terminated = success || failure;
        let truncated = !terminated && self.steps >= cfg.horizon;
        self.done = terminated || truncated;
        self.state = next.clone();
        Ok(StepOutcome {
            next_state: next,
            reward: value,
            terminated,
            truncated,
            info: StepInfo {
                success,
                failure,
                new_detections_per_type: new_per_type,
            },
        })
    }
}

impl Environment for ReefEnv {
    fn family(&self) -> Family {
        Family::Reef
    }

    fn num_actions(&self) -> usize {
        REEF_ACTIONS
    }

    fn observation_dim(&self) -> usize {
        REEF_STATE_DIM
    }

    fn reset(&mut self, task: &TaskSpec, seed: u64) -> Result<Vec<f64>> {
        self.reset_task(task, seed)?;
        Ok(state_vector(&self.state, &self.config))
    }

    fn step(&mut self, action: usize) -> Result<EnvStep> {
        let outcome = self.step_action(ReefAction::from_index(action)?)?;
        Ok(EnvStep {
            observation: state_vector(&outcome.next_state, &self.config),
            reward: outcome.reward,
            terminated: outcome.terminated,
            truncated: outcome.truncated,
            success: outcome.info.success,
        })
    }
}

/// One row of a reef trajectory dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReefTrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub vx: f64,
    pub vy: f64,
    pub action: usize,
    pub reward: f64,
    pub p_red: f64,
    pub p_blue: f64,
    pub p_green: f64,
    pub p_black: f64,
}

impl ReefTrajectoryRow {
    pub fn new(action: ReefAction, outcome: &StepOutcome) -> Self {
        let s = &outcome.next_state;
        let k = &s.kinematics;
        ReefTrajectoryRow {
            t: s.time,
            x: k.position[0],
            y: k.position[1],
            theta: k.heading,
            vx: k.velocity[0],
            vy: k.velocity[1],
            action: action as usize,
            reward: outcome.reward,
            p_red: s.remaining[0],
            p_blue: s.remaining[1],
            p_green: s.remaining[2],
            p_black: s.remaining[3],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{build_catalog, CatalogConfig, Split};

    fn red_task() -> TaskSpec {
        TaskSpec::reef("none-red", [0.0; 3], [true, false, false, false], Split::Train).unwrap()
    }

    #[test]
    fn reset_places_125_per_type() {
        let mut env = ReefEnv::new(ReefConfig::default()).unwrap();
        env.reset_task(&red_task(), 3).unwrap();
        assert_eq!(env.organisms().len(), 500);
        for kind in OrganismType::ALL {
            assert_eq!(env.organisms().iter().filter(|o| o.kind == kind).count(), 125);
        }
        let s = env.state();
        assert_eq!(s.remaining, [1.0; 4]);
        assert_eq!(s.time, 0.0);
        assert!(env.organisms().iter().all(|o| !o.discovered));
    }

    #[test]
    fn placement_respects_sectors() {
        for o in place_organisms(125, [2.0, 9.0], 11) {
            let r = o.position[0].hypot(o.position[1]);
            assert!((2.0..=9.0).contains(&r));
            let angle = o.position[1].atan2(o.position[0]).rem_euclid(std::f64::consts::TAU);
            let sector = (angle / FRAC_PI_2).floor() as usize;
            assert_eq!(sector.min(3), o.kind.index());
        }
    }

    #[test]
    fn same_seed_same_field() {
        assert_eq!(place_organisms(125, [2.0, 9.0], 5), place_organisms(125, [2.0, 9.0], 5));
        assert_ne!(place_organisms(125, [2.0, 9.0], 5), place_organisms(125, [2.0, 9.0], 6));
    }

    #[test]
    fn reset_state_vector_with_nothing_in_range() {
        // detector range below the placement radius: nothing visible at reset
        let cfg = ReefConfig {
            d_max: 1.5,
            ..ReefConfig::default()
        };
        let mut env = ReefEnv::new(cfg.clone()).unwrap();
        env.reset_task(&red_task(), 0).unwrap();
        let v = state_vector(env.state(), &cfg);
        assert_eq!(v.len(), 43);
        assert_eq!(&v[0..2], &[0.0, 0.0]);
        assert_eq!(v[6], 0.0);
        assert_eq!(&v[7..11], &[1.0; 4]);
        assert!(v[11..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn stepping_finished_episode_is_an_error() {
        let mut env = ReefEnv::new(ReefConfig::default()).unwrap();
        assert!(matches!(env.step_action(ReefAction::NoOp), Err(Error::EpisodeFinished)));
        let cfg = ReefConfig {
            horizon: 2,
            ..ReefConfig::default()
        };
        let mut env = ReefEnv::new(cfg).unwrap();
        env.reset_task(&red_task(), 0).unwrap();
        assert!(!env.step_action(ReefAction::NoOp).unwrap().truncated);
        let last = env.step_action(ReefAction::NoOp).unwrap();
        assert!(last.truncated && !last.terminated);
        assert!((last.reward + 0.1).abs() < 1e-12);
        assert!(matches!(env.step_action(ReefAction::NoOp), Err(Error::EpisodeFinished)));
    }

    #[test]
    fn grid_task_rejected() {
        let grid = build_catalog(Family::Grid, &CatalogConfig::default()).unwrap();
        let mut env = ReefEnv::new(ReefConfig::default()).unwrap();
        assert!(env.reset_task(&grid.train[0], 0).is_err());
    }

    #[test]
    fn driving_out_fails_with_penalty() {
        let mut env = ReefEnv::new(ReefConfig::default()).unwrap();
        env.reset_task(&red_task(), 1).unwrap();
        let mut last = None;
        for _ in 0..100 {
            let o = env.step_action(ReefAction::Backward).unwrap();
            let done = o.terminated || o.truncated;
            last = Some(o);
            if done {
                break;
            }
        }
        let last = last.unwrap();
        assert!(last.terminated && last.info.failure);
        assert_eq!(last.reward, -1000.0);
        let k = last.next_state.kinematics;
        assert!(k.position[0].hypot(k.position[1]) >= 10.0);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = ReefConfig {
            alpha: 1.0,
            ..ReefConfig::default()
        };
        assert!(ReefEnv::new(cfg).is_err());
    }
}
