use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One stored experience.
///
/// `terminal` is set only when the episode ended by success or failure;
/// horizon truncation is stored as non-terminal so bootstrapping continues.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
    /// Task context for contextual learners, empty otherwise.
    pub context: Vec<f64>,
}

/// Fixed-capacity ring of transitions stored in flat arrays.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    state_dim: usize,
    context_dim: usize,
    states: Vec<f64>,
    next_states: Vec<f64>,
    contexts: Vec<f64>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
    terminals: Vec<bool>,
    cursor: usize,
    len: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, state_dim: usize, context_dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay capacity must be positive".into()));
        }
        Ok(ReplayBuffer {
            capacity,
            state_dim,
            context_dim,
            states: Vec::new(),
            next_states: Vec::new(),
            contexts: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            terminals: Vec::new(),
            cursor: 0,
            len: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Stores a transition, overwriting the oldest one once full.
    pub fn push(&mut self, t: &Transition) -> Result<()> {
        if t.state.len() != self.state_dim || t.next_state.len() != self.state_dim || t.context.len() != self.context_dim {
            return Err(Error::Shape(format!(
                "transition dims ({}, {}, {}) do not match buffer ({}, {})",
                t.state.len(),
                t.next_state.len(),
                t.context.len(),
                self.state_dim,
                self.context_dim
            )));
        }
        if self.len < self.capacity {
            // storage grows lazily up to capacity
            self.states.extend_from_slice(&t.state);
            self.next_states.extend_from_slice(&t.next_state);
            self.contexts.extend_from_slice(&t.context);
            self.actions.push(t.action);
            self.rewards.push(t.reward);
            self.terminals.push(t.terminal);
            self.len += 1;
        } else {
            let i = self.cursor;
            let (s, c) = (self.state_dim, self.context_dim);
            self.states[i * s..(i + 1) * s].copy_from_slice(&t.state);
            self.next_states[i * s..(i + 1) * s].copy_from_slice(&t.next_state);
            self.contexts[i * c..(i + 1) * c].copy_from_slice(&t.context);
            self.actions[i] = t.action;
            self.rewards[i] = t.reward;
            self.terminals[i] = t.terminal;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.state_dim..(i + 1) * self.state_dim]
    }

    pub fn next_state(&self, i: usize) -> &[f64] {
        &self.next_states[i * self.state_dim..(i + 1) * self.state_dim]
    }

    pub fn context(&self, i: usize) -> &[f64] {
        &self.contexts[i * self.context_dim..(i + 1) * self.context_dim]
    }

    pub fn action(&self, i: usize) -> usize {
        self.actions[i]
    }

    pub fn reward(&self, i: usize) -> f64 {
        self.rewards[i]
    }

    pub fn terminal(&self, i: usize) -> bool {
        self.terminals[i]
    }

    pub fn get(&self, i: usize) -> Transition {
        Transition {
            state: self.state(i).to_vec(),
            action: self.action(i),
            reward: self.reward(i),
            next_state: self.next_state(i).to_vec(),
            terminal: self.terminal(i),
            context: self.context(i).to_vec(),
        }
    }

    /// Storage slots of a uniform sample without replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<usize>> {
        if batch_size > self.len {
            return Err(Error::Config(format!(
                "cannot sample {batch_size} transitions from a buffer holding {}",
                self.len
            )));
        }
        Ok(sample(rng, self.len, batch_size).into_vec())
    }

    /// Uniform batch without replacement, deterministic per `seed`.
    pub fn sample_seeded(&self, batch_size: usize, seed: u64) -> Result<Vec<Transition>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(self.sample_indices(batch_size, &mut rng)?.into_iter().map(|i| self.get(i)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tagged(id: usize) -> Transition {
        Transition {
            state: vec![id as f64],
            action: 0,
            reward: id as f64,
            next_state: vec![id as f64 + 0.5],
            terminal: false,
            context: vec![],
        }
    }

    fn stored_ids(buf: &ReplayBuffer) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..buf.len()).map(|i| buf.reward(i) as usize).collect();
        ids.sort();
        ids
    }

    #[test]
    fn single_push() {
        let mut buf = ReplayBuffer::new(4, 1, 0).unwrap();
        buf.push(&tagged(0)).unwrap();
        assert_eq!(buf.len(), 1);
        assert_eq!(buf.get(0), tagged(0));
    }

    #[test]
    fn overflow_drops_oldest() {
        let mut buf = ReplayBuffer::new(4, 1, 0).unwrap();
        for id in 0..5 {
            buf.push(&tagged(id)).unwrap();
        }
        assert_eq!(buf.len(), 4);
        assert_eq!(stored_ids(&buf), vec![1, 2, 3, 4]);
    }

    #[test]
    fn eviction_is_fifo() {
        let cap = 7;
        let mut buf = ReplayBuffer::new(cap, 1, 0).unwrap();
        for id in 0..3 * cap {
            buf.push(&tagged(id)).unwrap();
            let lo = (id + 1).saturating_sub(cap);
            assert_eq!(stored_ids(&buf), (lo..=id).collect::<Vec<_>>());
        }
    }

    #[test]
    fn dims_checked() {
        let mut buf = ReplayBuffer::new(4, 2, 1).unwrap();
        assert!(buf.push(&tagged(0)).is_err());
    }

    #[test]
    fn full_batch_returns_everything_once() {
        let mut buf = ReplayBuffer::new(10, 1, 0).unwrap();
        for id in 0..10 {
            buf.push(&tagged(id)).unwrap();
        }
        let batch = buf.sample_seeded(10, 3).unwrap();
        let mut ids: Vec<usize> = batch.iter().map(|t| t.reward as usize).collect();
        ids.sort();
        assert_eq!(ids, (0..10).collect::<Vec<_>>());
        assert_eq!(batch, buf.sample_seeded(10, 3).unwrap());
    }

    #[test]
    fn underfull_buffer_is_an_error() {
        let mut buf = ReplayBuffer::new(10, 1, 0).unwrap();
        buf.push(&tagged(0)).unwrap();
        assert!(buf.sample_seeded(2, 0).is_err());
    }

    #[test]
    fn inclusion_frequency_is_uniform() {
        let n = 20;
        let k = 5;
        let draws = 100_000;
        let mut buf = ReplayBuffer::new(n, 1, 0).unwrap();
        for id in 0..n {
            buf.push(&tagged(id)).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut counts = vec![0u32; n];
        for _ in 0..draws {
            for i in buf.sample_indices(k, &mut rng).unwrap() {
                counts[i] += 1;
            }
        }
        // each element is included with p = k/n per draw
        let p = k as f64 / n as f64;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() < 3.0 * sigma + 1.0, "{c} vs {mean} ± {sigma}");
        }
    }
}
