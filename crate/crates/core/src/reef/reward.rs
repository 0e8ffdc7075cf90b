//! Context-dependent reef reward.

use serde::{Deserialize, Serialize};

use super::detect::{per_type, DETECTION_DIM};
use super::ReefState;
use crate::task::TaskSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub r_success: f64,
    pub r_fail: f64,
    pub r_new: f64,
    pub r_penalty: f64,
    pub d_fail: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            r_success: 1000.0,
            r_fail: -1000.0,
            r_new: 1.0,
            r_penalty: 0.1,
            d_fail: 10.0,
        }
    }
}

/// Outcome class of a transition. Success is checked before failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardCase {
    Success,
    Failure,
    Step,
}

pub fn classify(next: &ReefState, task: &TaskSpec, origin: [f64; 2], params: &RewardParams) -> RewardCase {
    let interest = task.interest_weights();
    let remaining: f64 = next.remaining.iter().zip(interest).map(|(p, c)| p * c).sum();
    if remaining == 0.0 {
        return RewardCase::Success;
    }
    let dx = next.kinematics.position[0] - origin[0];
    let dy = next.kinematics.position[1] - origin[1];
    if dx.hypot(dy) >= params.d_fail {
        RewardCase::Failure
    } else {
        RewardCase::Step
    }
}

/// Intermediate reward: interesting new detections, divided by the number of
/// interesting types, times `r_new`, minus the per-step penalty.
pub fn step_reward(new_counts: &[u32; DETECTION_DIM], task: &TaskSpec, params: &RewardParams) -> f64 {
    let interest = task.interest_weights();
    let per_type = per_type(new_counts);
    let hits: f64 = per_type.iter().zip(interest).map(|(&n, c)| n as f64 * c).sum();
    let norm: f64 = interest.iter().sum();
    hits / norm * params.r_new - params.r_penalty
}

/// Reward of the transition `prev -> next` that produced `new_counts`.
pub fn reward(
    _prev: &ReefState,
    next: &ReefState,
    new_counts: &[u32; DETECTION_DIM],
    task: &TaskSpec,
    origin: [f64; 2],
    params: &RewardParams,
) -> f64 {
    match classify(next, task, origin, params) {
        RewardCase::Success => params.r_success,
        RewardCase::Failure => params.r_fail,
        RewardCase::Step => step_reward(new_counts, task, params),
    }
}
