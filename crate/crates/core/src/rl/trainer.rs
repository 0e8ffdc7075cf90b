use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ddqn_target, EpsilonSchedule, InputLayout, Policy, ReplayBuffer, Transition};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::nn::{adam_step, argmax, AdamConfig, AdamState, Mlp, Workspace};
use crate::seed::{derive_seed, rng_for, tags};
use crate::task::{context_vector, TaskSpec};

/// Learner hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DqnConfig {
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Transitions stored before the first gradient update.
    pub warmup: usize,
    /// Hard copy online -> target every this many environment steps.
    pub target_period: u64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_fraction: f64,
    pub huber_delta: f64,
    pub adam: AdamConfig,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            buffer_capacity: 100_000,
            batch_size: 64,
            warmup: 1_000,
            target_period: 1_000,
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_fraction: 0.1,
            huber_delta: 1.0,
            adam: AdamConfig::default(),
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.buffer_capacity == 0 || self.batch_size == 0 || self.target_period == 0 {
            return bad("buffer_capacity, batch_size and target_period must be positive");
        }
        if self.batch_size > self.buffer_capacity {
            return bad("batch_size exceeds buffer_capacity");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        let eps = [self.epsilon_start, self.epsilon_end, self.epsilon_fraction];
        if eps.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return bad("epsilon settings must lie in [0, 1]");
        }
        if self.huber_delta <= 0.0 || self.adam.lr <= 0.0 {
            return bad("huber_delta and learning rate must be positive");
        }
        Ok(())
    }

    pub fn schedule(&self, total_steps: u64) -> EpsilonSchedule {
        EpsilonSchedule {
            start: self.epsilon_start,
            end: self.epsilon_end,
            fraction: self.epsilon_fraction,
            total_steps,
        }
    }
}

/// One row of the training diagnostics stream, emitted when an episode ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub step: u64,
    pub episode: u64,
    pub task_id: String,
    pub epsilon: f64,
    /// Mean batch loss over the episode's updates; empty before warmup.
    pub loss: Option<f64>,
    pub episode_return: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    /// Environment steps taken so far, including this one.
    pub step: u64,
    pub epsilon: f64,
    pub loss: Option<f64>,
    pub target_synced: bool,
    pub episode_end: Option<EpisodeRecord>,
}

/// DDQN learner over a set of training tasks. With `contextual` set the task
/// context is appended to every network input; otherwise the learner is a
/// plain single-task (or context-blind) DQN.
pub struct Trainer<E: Environment> {
    env: E,
    tasks: Vec<TaskSpec>,
    contexts: Vec<Vec<f64>>,
    contextual: bool,
    layout: InputLayout,
    online: Mlp,
    target: Mlp,
    adam: AdamState,
    buffer: ReplayBuffer,
    config: DqnConfig,
    schedule: EpsilonSchedule,
    seed: u64,
    explore_rng: ChaCha8Rng,
    replay_rng: ChaCha8Rng,
    task_rng: ChaCha8Rng,
    step: u64,
    episode: u64,
    task: usize,
    obs: Vec<f64>,
    episode_return: f64,
    episode_loss: f64,
    episode_updates: u32,
    grad: Vec<f64>,
    input: Vec<f64>,
    ws: [Workspace; 2],
}

impl<E: Environment> Trainer<E> {
    /// `hidden` lists hidden-layer widths. `total_steps` only shapes the
    /// exploration schedule.
    pub fn new(
        env: E,
        tasks: Vec<TaskSpec>,
        contextual: bool,
        hidden: &[usize],
        config: DqnConfig,
        total_steps: u64,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if tasks.is_empty() {
            return Err(Error::Empty("training tasks"));
        }
        let family = env.family();
        if let Some(t) = tasks.iter().find(|t| t.family != family) {
            return Err(Error::Incompatible(format!("task `{}` is not a {family} task", t.id)));
        }
        let context_dim = family.context_dim();
        let contexts = tasks
            .iter()
            .map(|t| Ok(if contextual { context_vector(t)?.0 } else { Vec::new() }))
            .collect::<Result<Vec<_>>>()?;
        let state_dim = env.observation_dim();
        let input_dim = state_dim + if contextual { context_dim } else { 0 };
        let mut sizes = vec![input_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(env.num_actions());
        let online = Mlp::init(&sizes, &mut rng_for(seed, tags::INIT, 0))?;
        let mut trainer = Trainer {
            buffer: ReplayBuffer::new(config.buffer_capacity, state_dim, if contextual { context_dim } else { 0 })?,
            adam: AdamState::for_net(&online, config.adam),
            grad: vec![0.0; online.num_params()],
            ws: [Workspace::new(&online), Workspace::new(&online)],
            target: online.clone(),
            online,
            schedule: config.schedule(total_steps),
            config,
            layout: InputLayout {
                family,
                state_dim,
                context_dim,
            },
            env,
            tasks,
            contexts,
            contextual,
            seed,
            explore_rng: rng_for(seed, tags::EXPLORE, 0),
            replay_rng: rng_for(seed, tags::REPLAY, 0),
            task_rng: rng_for(seed, tags::TASK, 0),
            step: 0,
            episode: 0,
            task: 0,
            obs: Vec::new(),
            episode_return: 0.0,
            episode_loss: 0.0,
            episode_updates: 0,
            input: Vec::with_capacity(input_dim),
        };
        trainer.begin_episode()?;
        Ok(trainer)
    }

    fn begin_episode(&mut self) -> Result<()> {
        self.task = self.task_rng.gen_range(0..self.tasks.len());
        let env_seed = derive_seed(self.seed, tags::ENV, self.episode);
        self.obs = self.env.reset(&self.tasks[self.task], env_seed)?;
        self.episode_return = 0.0;
        self.episode_loss = 0.0;
        self.episode_updates = 0;
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn episodes(&self) -> u64 {
        self.episode
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn online(&self) -> &Mlp {
        &self.online
    }

    pub fn target(&self) -> &Mlp {
        &self.target
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    /// Greedy policy snapshot of the online network.
    pub fn policy(&self) -> Result<Policy> {
        if self.contextual {
            Policy::contextual(self.layout, self.online.clone())
        } else {
            Policy::single_task(self.layout, self.online.clone())
        }
    }

    /// One ε-greedy environment step, a buffer push, a gradient update once
    /// warm, and the periodic target copy.
    pub fn train_step(&mut self) -> Result<StepDiagnostics> {
        let epsilon = self.schedule.epsilon_at(self.step);
        let ctx = &self.contexts[self.task];
        let action = if self.explore_rng.gen::<f64>() < epsilon {
            self.explore_rng.gen_range(0..self.online.output_dim())
        } else {
            self.input.clear();
            self.input.extend_from_slice(&self.obs);
            self.input.extend_from_slice(ctx);
            self.online.forward_into(&self.input, &mut self.ws[0])?;
            argmax(self.ws[0].output())
        };
        let out = self.env.step(action)?;
        let next = out.observation;
        self.buffer.push(&Transition {
            state: std::mem::take(&mut self.obs),
            action,
            reward: out.reward,
            next_state: next.clone(),
            terminal: out.terminated,
            context: ctx.clone(),
        })?;
        self.obs = next;
        self.episode_return += out.reward;
        self.step += 1;

        let warm = self.buffer.len() >= self.config.warmup.max(self.config.batch_size);
        let loss = if warm { Some(self.update()?) } else { None };
        if let Some(l) = loss {
            self.episode_loss += l;
            self.episode_updates += 1;
        }
        let target_synced = self.step.is_multiple_of(self.config.target_period);
        if target_synced {
            self.target.params_mut().copy_from_slice(self.online.params());
        }

        let episode_end = if out.terminated || out.truncated {
            let record = EpisodeRecord {
                step: self.step,
                episode: self.episode,
                task_id: self.tasks[self.task].id.clone(),
                epsilon,
                loss: (self.episode_updates > 0).then(|| self.episode_loss / self.episode_updates as f64),
                episode_return: self.episode_return,
            };
            self.episode += 1;
            self.begin_episode()?;
            Some(record)
        } else {
            None
        };
        Ok(StepDiagnostics {
            step: self.step,
            epsilon,
            loss,
            target_synced,
            episode_end,
        })
    }

    /// Runs `n` steps, collecting finished-episode records.
    pub fn train_steps(&mut self, n: u64) -> Result<Vec<EpisodeRecord>> {
        let mut records = Vec::new();
        for _ in 0..n {
            if let Some(r) = self.train_step()?.episode_end {
                records.push(r);
            }
        }
        Ok(records)
    }

    /// One Adam step on a fresh batch; returns the mean batch loss.
    pub fn update(&mut self) -> Result<f64> {
        let batch = self.buffer.sample_indices(self.config.batch_size, &mut self.replay_rng)?;
        self.update_on(&batch)
    }

    /// One Adam step on the given buffer slots.
    pub fn update_on(&mut self, slots: &[usize]) -> Result<f64> {
        if slots.is_empty() {
            return Err(Error::Empty("batch"));
        }
        self.grad.fill(0.0);
        let scale = 1.0 / slots.len() as f64;
        let [ws_a, ws_b] = &mut self.ws;
        let mut total = 0.0;
        for &i in slots {
            self.input.clear();
            self.input.extend_from_slice(self.buffer.next_state(i));
            self.input.extend_from_slice(self.buffer.context(i));
            let y = ddqn_target(
                self.buffer.reward(i),
                self.buffer.terminal(i),
                &self.input,
                &self.online,
                &self.target,
                self.config.gamma,
                ws_a,
                ws_b,
            )?;
            self.input.clear();
            self.input.extend_from_slice(self.buffer.state(i));
            self.input.extend_from_slice(self.buffer.context(i));
            total += self.online.accumulate_gradient(
                &self.input,
                self.buffer.action(i),
                y,
                self.config.huber_delta,
                scale,
                &mut self.grad,
                ws_a,
            )?;
        }
        adam_step(self.online.params_mut(), &self.grad, &mut self.adam)?;
        Ok(total * scale)
    }
}
