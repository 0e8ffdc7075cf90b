//! Contextual multi-task reinforcement learning for coral-reef survey tasks
//! and a discrete grid analogue.
//!
//! * [`task`]: task specs, catalogs and context vectors
//! * [`reef`] and [`grid`]: the two environment families
//! * [`nn`]: a small dense network with exact gradients and Adam
//! * [`rl`]: replay, double DQN, contextual and mixture-of-experts policies
//! * [`eval`]: rollouts, interquartile means and bootstrap intervals
//! * [`config`] and [`experiment`]: JSON-configured runs and their artifacts

pub mod config;
pub mod env;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod grid;
pub mod nn;
pub mod reef;
pub mod rl;
pub mod seed;
pub mod task;

pub use config::{Algorithm, ExperimentConfig};
pub use env::Environment;
pub use error::{Error, Result};
pub use seed::derive_seed;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tasks.md")]
    mod tasks {}
    #[doc = include_str!("../../../book/src/reef.md")]
    mod reef {}
    #[doc = include_str!("../../../book/src/grid.md")]
    mod grid {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/learning.md")]
    mod learning {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
