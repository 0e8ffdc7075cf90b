use serde::{Deserialize, Serialize};

use super::Mlp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment estimates for one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(num_params: usize, config: AdamConfig) -> Self {
        AdamState {
            config,
            first: vec![0.0; num_params],
            second: vec![0.0; num_params],
            step: 0,
        }
    }

    pub fn for_net(net: &Mlp, config: AdamConfig) -> Self {
        Self::new(net.num_params(), config)
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.first.len() {
        return Err(Error::Shape(format!(
            "adam: {} parameters, {} gradients, {} moments",
            params.len(),
            grads.len(),
            state.first.len()
        )));
    }
    state.step += 1;
    let AdamConfig {
        lr,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first.iter_mut())
        .zip(state.second.iter_mut())
    {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = vec![1.0, -2.0, 0.5];
        let mut s = AdamState::new(3, AdamConfig::default());
        adam_step(&mut p, &[0.0; 3], &mut s).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let cfg = AdamConfig::default();
        let mut p = vec![0.0, 0.0, 0.0];
        let g = [0.3, -4.0, 1e-3];
        let mut s = AdamState::new(3, cfg);
        adam_step(&mut p, &g, &mut s).unwrap();
        for (x, gi) in p.iter().zip(g) {
            // m_hat = g, v_hat = g^2, step = lr * |g| / (|g| + eps)
            let expected = -cfg.lr * gi.signum() * gi.abs() / (gi.abs() + cfg.epsilon);
            assert!((x - expected).abs() < 1e-15);
            assert!((x.abs() - cfg.lr).abs() < 1e-8);
        }
    }

    #[test]
    fn minimizes_a_parabola() {
        // f(w) = w^2, w0 = 1, lr = 0.01
        let mut w = vec![1.0];
        let mut s = AdamState::new(
            1,
            AdamConfig {
                lr: 0.01,
                ..AdamConfig::default()
            },
        );
        let mut prev = w[0];
        let mut reached = None;
        for step in 1..=500 {
            let g = [2.0 * w[0]];
            adam_step(&mut w, &g, &mut s).unwrap();
            if reached.is_none() {
                assert!(w[0].abs() < prev.abs(), "not monotone at step {step}");
                if w[0].abs() < 0.1 {
                    reached = Some(step);
                }
            }
            prev = w[0];
        }
        assert!(reached.is_some());
    }

    #[test]
    fn shape_mismatch() {
        let mut s = AdamState::new(2, AdamConfig::default());
        assert!(adam_step(&mut [0.0; 3], &[0.0; 3], &mut s).is_err());
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut p = vec![0.4, -0.1];
            let mut s = AdamState::new(2, AdamConfig::default());
            for k in 0..10 {
                adam_step(&mut p, &[k as f64 * 0.1, -0.2], &mut s).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }
}
