use serde::{Deserialize, Serialize};

/// Linear exploration decay from `start` to `end` over the first `fraction`
/// of `total_steps`, constant afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub fraction: f64,
    pub total_steps: u64,
}

impl EpsilonSchedule {
    pub fn new(total_steps: u64) -> Self {
        EpsilonSchedule {
            start: 1.0,
            end: 0.05,
            fraction: 0.1,
            total_steps,
        }
    }

    pub fn epsilon_at(&self, t: u64) -> f64 {
        let window = self.fraction * self.total_steps as f64;
        if window <= 0.0 || t as f64 >= window {
            return self.end;
        }
        self.start + (self.end - self.start) * (t as f64 / window)
    }
}
