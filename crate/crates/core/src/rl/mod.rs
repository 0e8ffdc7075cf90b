//! Double DQN, its contextual variant, and the mixture-of-experts baseline.

mod buffer;
mod ddqn;
mod policy;
mod schedule;
mod trainer;

pub use buffer::{ReplayBuffer, Transition};
pub use ddqn::{ddqn_target, ddqn_targets};
pub use policy::{moe_select, Expert, InputLayout, Policy, PolicyKind, POLICY_FORMAT_VERSION};
pub use schedule::EpsilonSchedule;
pub use trainer::{DqnConfig, EpisodeRecord, StepDiagnostics, Trainer};
