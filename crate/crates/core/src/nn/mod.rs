//! Fully connected Q-networks: rectifier hidden layers, linear output.
//!
//! Parameters live in one flat `Vec<f64>`, layer by layer, each layer storing
//! its weight matrix row-major (`out x in`, one row per output unit) followed
//! by its bias vector. Gradients and optimizer moments share that layout, so
//! the optimizer never needs to know about layers.

mod adam;
mod gradcheck;
mod io;
mod loss;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::{finite_diff_check, gradcheck_suite, kink_distance, GradcheckReport, KINK_MARGIN};
pub use io::{MlpDocument, LayerDocument, MLP_FORMAT_VERSION};
pub use loss::{huber, huber_grad, loss_and_grad, Workspace};

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
    offsets: Vec<usize>,
}

fn layer_offsets(sizes: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut at = 0;
    offsets.push(0);
    for pair in sizes.windows(2) {
        at += pair[0] * pair[1] + pair[1];
        offsets.push(at);
    }
    offsets
}

impl Mlp {
    /// Network with every weight and bias zero.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::Shape(format!(
                "need at least input and output widths, all positive; got {layer_sizes:?}"
            )));
        }
        let offsets = layer_offsets(layer_sizes);
        Ok(Mlp {
            sizes: layer_sizes.to_vec(),
            params: vec![0.0; *offsets.last().expect("non-empty")],
            offsets,
        })
    }

    /// He-style uniform initialization: weights in `±sqrt(6 / fan_in)`, zero biases.
    pub fn init<R: Rng + ?Sized>(layer_sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes)?;
        for layer in 0..net.num_layers() {
            let bound = (6.0 / net.sizes[layer] as f64).sqrt();
            for w in net.weights_mut(layer) {
                *w = rng.gen_range(-bound..bound);
            }
        }
        Ok(net)
    }

    /// Rebuilds a network from its flat parameter vector.
    pub fn from_params(layer_sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes)?;
        if params.len() != net.params.len() {
            return Err(Error::Shape(format!(
                "{layer_sizes:?} needs {} parameters, got {}",
                net.params.len(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Shape("non-finite parameter".into()));
        }
        net.params = params;
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("validated")
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn weight_range(&self, layer: usize) -> std::ops::Range<usize> {
        let start = self.offsets[layer];
        start..start + self.sizes[layer] * self.sizes[layer + 1]
    }

    fn bias_range(&self, layer: usize) -> std::ops::Range<usize> {
        let end = self.offsets[layer + 1];
        end - self.sizes[layer + 1]..end
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        &self.params[self.weight_range(layer)]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        let range = self.weight_range(layer);
        &mut self.params[range]
    }

    pub fn biases(&self, layer: usize) -> &[f64] {
        &self.params[self.bias_range(layer)]
    }

    pub fn biases_mut(&mut self, layer: usize) -> &mut [f64] {
        let range = self.bias_range(layer);
        &mut self.params[range]
    }

    pub(crate) fn layer_offset(&self, layer: usize) -> usize {
        self.offsets[layer]
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "network expects {} inputs, got {}",
                self.input_dim(),
                input.len()
            )));
        }
        Ok(())
    }

    /// Evaluates the network on one input.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut ws = Workspace::new(self);
        self.forward_into(input, &mut ws)?;
        Ok(ws.output().to_vec())
    }

    /// Forward pass that keeps every activation in `ws` for a later backward
    /// pass. Zero inputs are skipped, which matters for one-hot observations.
    pub fn forward_into(&self, input: &[f64], ws: &mut Workspace) -> Result<()> {
        self.check_input(input)?;
        ws.prepare(self);
        ws.nonzero.clear();
        ws.nonzero.extend(input.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(i, _)| i));
        ws.activations[0].clear();
        ws.activations[0].extend_from_slice(input);
        let last = self.num_layers() - 1;
        for layer in 0..self.num_layers() {
            let n_in = self.sizes[layer];
            let weights = self.weights(layer);
            let biases = self.biases(layer);
            let (before, after) = ws.activations.split_at_mut(layer + 1);
            let x = &before[layer];
            let out = &mut after[0];
            for (j, slot) in out.iter_mut().enumerate() {
                let row = &weights[j * n_in..(j + 1) * n_in];
                let z = if layer == 0 {
                    ws.nonzero.iter().map(|&i| row[i] * x[i]).sum::<f64>()
                } else {
                    dot(row, x)
                } + biases[j];
                *slot = if layer < last { z.max(0.0) } else { z };
            }
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorize without reassociation
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in chunks * 4..a.len() {
        sum += a[i] * b[i];
    }
    sum
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
