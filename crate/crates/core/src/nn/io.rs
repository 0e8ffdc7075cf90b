//! Versioned JSON document for network parameters.

use serde::{Deserialize, Serialize};

use super::Mlp;
use crate::error::{Error, Result};

pub const MLP_FORMAT_VERSION: u32 = 1;
const ACTIVATION_TAG: &str = "relu";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDocument {
    /// One row per output unit.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

/// On-disk form of an [`Mlp`]. Numbers are written with shortest round-trip
/// formatting, so save/load recovers every parameter bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpDocument {
    pub format_version: u32,
    pub layer_sizes: Vec<usize>,
    /// Hidden-layer activation; the output layer is always linear.
    pub activation: String,
    pub layers: Vec<LayerDocument>,
}

impl From<&Mlp> for MlpDocument {
    fn from(net: &Mlp) -> Self {
        let layers = (0..net.num_layers())
            .map(|l| {
                let n_in = net.layer_sizes()[l];
                LayerDocument {
                    weights: net.weights(l).chunks(n_in).map(<[f64]>::to_vec).collect(),
                    biases: net.biases(l).to_vec(),
                }
            })
            .collect();
        MlpDocument {
            format_version: MLP_FORMAT_VERSION,
            layer_sizes: net.layer_sizes().to_vec(),
            activation: ACTIVATION_TAG.to_string(),
            layers,
        }
    }
}

impl TryFrom<MlpDocument> for Mlp {
    type Error = Error;

    fn try_from(doc: MlpDocument) -> Result<Self> {
        if doc.format_version != MLP_FORMAT_VERSION {
            return Err(Error::Version {
                found: doc.format_version,
                supported: MLP_FORMAT_VERSION,
            });
        }
        if doc.activation != ACTIVATION_TAG {
            return Err(Error::Incompatible(format!("unsupported activation `{}`", doc.activation)));
        }
        if doc.layers.len() + 1 != doc.layer_sizes.len() {
            return Err(Error::Shape(format!(
                "{} layer sizes but {} layers",
                doc.layer_sizes.len(),
                doc.layers.len()
            )));
        }
        let mut params = Vec::new();
        for (l, layer) in doc.layers.iter().enumerate() {
            let (n_in, n_out) = (doc.layer_sizes[l], doc.layer_sizes[l + 1]);
            if layer.weights.len() != n_out || layer.weights.iter().any(|r| r.len() != n_in) || layer.biases.len() != n_out {
                return Err(Error::Shape(format!("layer {l} does not match {n_in} -> {n_out}")));
            }
            for row in &layer.weights {
                params.extend_from_slice(row);
            }
            params.extend_from_slice(&layer.biases);
        }
        Mlp::from_params(&doc.layer_sizes, params)
    }
}
