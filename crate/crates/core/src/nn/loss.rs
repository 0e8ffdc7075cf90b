use super::Mlp;
use crate::error::{Error, Result};

/// Huber loss of a residual.
pub fn huber(residual: f64, delta: f64) -> f64 {
    let a = residual.abs();
    if a <= delta {
        0.5 * residual * residual
    } else {
        delta * (a - 0.5 * delta)
    }
}

/// Derivative of [`huber`] with respect to the residual.
pub fn huber_grad(residual: f64, delta: f64) -> f64 {
    residual.clamp(-delta, delta)
}

/// Scratch buffers for forward and backward passes, reusable across calls.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    pub(crate) activations: Vec<Vec<f64>>,
    pub(crate) nonzero: Vec<usize>,
    delta: Vec<f64>,
    upstream: Vec<f64>,
}

impl Workspace {
    pub fn new(net: &Mlp) -> Self {
        let mut ws = Workspace::default();
        ws.prepare(net);
        ws
    }

    pub(crate) fn prepare(&mut self, net: &Mlp) {
        let sizes = net.layer_sizes();
        if self.activations.len() != sizes.len() || self.activations.iter().zip(sizes).any(|(a, &s)| a.len() != s) {
            self.activations = sizes.iter().map(|&s| vec![0.0; s]).collect();
        }
    }

    /// Output of the last forward pass.
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("prepared")
    }
}

impl Mlp {
    /// Adds `scale * dL/dparams` of one sample's Huber loss on output `action`
    /// into `grad`, returning the unscaled sample loss.
    pub fn accumulate_gradient(
        &self,
        input: &[f64],
        action: usize,
        target: f64,
        delta: f64,
        scale: f64,
        grad: &mut [f64],
        ws: &mut Workspace,
    ) -> Result<f64> {
        if action >= self.output_dim() {
            return Err(Error::ActionOutOfRange {
                index: action,
                len: self.output_dim(),
            });
        }
        if grad.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "gradient buffer has {} entries, network has {}",
                grad.len(),
                self.num_params()
            )));
        }
        self.forward_into(input, ws)?;
        let residual = ws.output()[action] - target;
        let loss = huber(residual, delta);
        let g = scale * huber_grad(residual, delta);
        if g == 0.0 {
            return Ok(loss);
        }

        let last = self.num_layers() - 1;
        ws.delta.clear();
        ws.delta.resize(self.output_dim(), 0.0);
        ws.delta[action] = g;
        for layer in (0..=last).rev() {
            let n_in = self.layer_sizes()[layer];
            let n_out = self.layer_sizes()[layer + 1];
            let w_start = self.layer_offset(layer);
            let b_start = w_start + n_in * n_out;
            let x = &ws.activations[layer];
            for j in 0..n_out {
                let d = ws.delta[j];
                if d == 0.0 {
                    continue;
                }
                grad[b_start + j] += d;
                let row = &mut grad[w_start + j * n_in..w_start + (j + 1) * n_in];
                if layer == 0 {
                    for &i in &ws.nonzero {
                        row[i] += d * x[i];
                    }
                } else {
                    for (r, &xi) in row.iter_mut().zip(x) {
                        *r += d * xi;
                    }
                }
            }
            if layer == 0 {
                break;
            }
            // delta of the layer below, through the rectifier
            let weights = self.weights(layer);
            ws.upstream.clear();
            ws.upstream.resize(n_in, 0.0);
            for j in 0..n_out {
                let d = ws.delta[j];
                if d == 0.0 {
                    continue;
                }
                let row = &weights[j * n_in..(j + 1) * n_in];
                for (u, &w) in ws.upstream.iter_mut().zip(row) {
                    *u += d * w;
                }
            }
            for (u, &a) in ws.upstream.iter_mut().zip(x) {
                if a <= 0.0 {
                    *u = 0.0;
                }
            }
            std::mem::swap(&mut ws.delta, &mut ws.upstream);
        }
        Ok(loss)
    }
}

/// Mean Huber loss between `Q(input_b)[action_b]` and `target_b` over a batch,
/// with its exact gradient in the network's flat parameter layout.
pub fn loss_and_grad(
    net: &Mlp,
    inputs: &[Vec<f64>],
    actions: &[usize],
    targets: &[f64],
    delta: f64,
) -> Result<(f64, Vec<f64>)> {
    if inputs.is_empty() {
        return Err(Error::Empty("batch"));
    }
    if inputs.len() != actions.len() || inputs.len() != targets.len() {
        return Err(Error::Shape(format!(
            "batch of {} inputs with {} actions and {} targets",
            inputs.len(),
            actions.len(),
            targets.len()
        )));
    }
    let scale = 1.0 / inputs.len() as f64;
    let mut grad = vec![0.0; net.num_params()];
    let mut ws = Workspace::new(net);
    let mut total = 0.0;
    for ((input, &action), &target) in inputs.iter().zip(actions).zip(targets) {
        total += net.accumulate_gradient(input, action, target, delta, scale, &mut grad, &mut ws)?;
    }
    Ok((total * scale, grad))
}
