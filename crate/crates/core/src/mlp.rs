//! Sigmoid multilayer perceptron over a flat parameter vector.
//!
//! Parameters are laid out layer by layer. For each non-input layer the
//! incoming weight matrix comes first in (destination, source) row order,
//! followed by that layer's biases when biases are enabled.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlpError {
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("{what}: expected length {expected}, got {actual}")]
    Shape {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("cannot evaluate an empty sample set")]
    EmptySamples,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpTopology {
    layer_sizes: Vec<usize>,
    biases_enabled: bool,
}

impl MlpTopology {
    pub fn new(layer_sizes: Vec<usize>, biases_enabled: bool) -> Result<Self, MlpError> {
        if layer_sizes.len() < 3 {
            return Err(MlpError::Topology(format!(
                "need input, at least one hidden and output layer, got {} layers",
                layer_sizes.len()
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(MlpError::Topology("every layer needs at least one node".into()));
        }
        Ok(Self {
            layer_sizes,
            biases_enabled,
        })
    }

    /// Parses `"3-3-1"` style shapes (biases enabled).
    pub fn parse(shape: &str) -> Result<Self, MlpError> {
        shape.parse()
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn biases_enabled(&self) -> bool {
        self.biases_enabled
    }

    pub fn with_biases(mut self, enabled: bool) -> Self {
        self.biases_enabled = enabled;
        self
    }

    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Length of the flat parameter vector.
    pub fn dimension(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + if self.biases_enabled { w[1] } else { 0 })
            .sum()
    }

    fn widest(&self) -> usize {
        *self.layer_sizes.iter().max().unwrap()
    }
}

impl FromStr for MlpTopology {
    type Err = MlpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let sizes = s
            .split('-')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| MlpError::Topology(format!("bad layer size {part:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(sizes, true)
    }
}

impl fmt::Display for MlpTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.layer_sizes.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", parts.join("-"))
    }
}

/// One layer's parameters in matrix form.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// `weights[dest][src]`
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlatWeights(Vec<f64>);

impl FlatWeights {
    pub fn new(topology: &MlpTopology, values: Vec<f64>) -> Result<Self, MlpError> {
        check_len("weights", topology.dimension(), values.len())?;
        Ok(Self(values))
    }

    pub fn zeros(topology: &MlpTopology) -> Self {
        Self(vec![0.0; topology.dimension()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Splits the flat vector into per-layer matrices. Bias vectors are
    /// empty when the topology has no biases.
    pub fn layers(&self, topology: &MlpTopology) -> Vec<LayerParams> {
        let mut offset = 0;
        let mut out = Vec::new();
        for w in topology.layer_sizes().windows(2) {
            let (src, dst) = (w[0], w[1]);
            let weights = (0..dst)
                .map(|d| self.0[offset + d * src..offset + (d + 1) * src].to_vec())
                .collect();
            offset += src * dst;
            let biases = if topology.biases_enabled() {
                let b = self.0[offset..offset + dst].to_vec();
                offset += dst;
                b
            } else {
                Vec::new()
            };
            out.push(LayerParams { weights, biases });
        }
        out
    }

    pub fn from_layers(topology: &MlpTopology, layers: &[LayerParams]) -> Result<Self, MlpError> {
        let mut values = Vec::with_capacity(topology.dimension());
        for layer in layers {
            for row in &layer.weights {
                values.extend_from_slice(row);
            }
            values.extend_from_slice(&layer.biases);
        }
        Self::new(topology, values)
    }
}

impl std::ops::Deref for FlatWeights {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePair {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<(), MlpError> {
    if expected == actual {
        Ok(())
    } else {
        Err(MlpError::Shape {
            what,
            expected,
            actual,
        })
    }
}

/// Checks every sample against the topology's input and output widths.
pub fn check_samples(topology: &MlpTopology, samples: &[SamplePair]) -> Result<(), MlpError> {
    if samples.is_empty() {
        return Err(MlpError::EmptySamples);
    }
    for s in samples {
        check_len("sample input", topology.inputs(), s.input.len())?;
        check_len("sample target", topology.outputs(), s.target.len())?;
    }
    Ok(())
}

/// Runs one input through the network, writing every layer's activations
/// (input layer included) into `activations`. Shapes are not checked.
pub(crate) fn forward_into(
    topology: &MlpTopology,
    weights: &[f64],
    input: &[f64],
    activations: &mut [Vec<f64>],
) {
    let sizes = topology.layer_sizes();
    activations[0].clear();
    activations[0].extend_from_slice(input);
    let mut offset = 0;
    for l in 1..sizes.len() {
        let (src, dst) = (sizes[l - 1], sizes[l]);
        let (prev, rest) = activations.split_at_mut(l);
        let x = &prev[l - 1];
        let y = &mut rest[0];
        y.clear();
        let bias_base = offset + src * dst;
        for d in 0..dst {
            let row = &weights[offset + d * src..offset + (d + 1) * src];
            let mut z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum();
            if topology.biases_enabled() {
                z += weights[bias_base + d];
            }
            y.push(sigmoid(z));
        }
        offset = bias_base + if topology.biases_enabled() { dst } else { 0 };
    }
}

pub(crate) fn activation_buffers(topology: &MlpTopology) -> Vec<Vec<f64>> {
    let widest = topology.widest();
    topology
        .layer_sizes()
        .iter()
        .map(|_| Vec::with_capacity(widest))
        .collect()
}

/// Output-layer activations for one input.
pub fn forward(topology: &MlpTopology, weights: &[f64], input: &[f64]) -> Result<Vec<f64>, MlpError> {
    check_len("weights", topology.dimension(), weights.len())?;
    check_len("input", topology.inputs(), input.len())?;
    let mut acts = activation_buffers(topology);
    forward_into(topology, weights, input, &mut acts);
    Ok(acts.pop().unwrap())
}

/// Predictions for a batch of inputs.
pub fn predict_all(
    topology: &MlpTopology,
    weights: &[f64],
    samples: &[SamplePair],
) -> Result<Vec<Vec<f64>>, MlpError> {
    check_len("weights", topology.dimension(), weights.len())?;
    let mut acts = activation_buffers(topology);
    samples
        .iter()
        .map(|s| {
            check_len("input", topology.inputs(), s.input.len())?;
            forward_into(topology, weights, &s.input, &mut acts);
            Ok(acts.last().unwrap().clone())
        })
        .collect()
}

/// Sum over output nodes of squared residuals, averaged over patterns.
pub fn batch_mse(
    topology: &MlpTopology,
    weights: &[f64],
    samples: &[SamplePair],
) -> Result<f64, MlpError> {
    check_len("weights", topology.dimension(), weights.len())?;
    check_samples(topology, samples)?;
    let mut acts = activation_buffers(topology);
    Ok(mse_unchecked(topology, weights, samples, &mut acts))
}

fn mse_unchecked(
    topology: &MlpTopology,
    weights: &[f64],
    samples: &[SamplePair],
    acts: &mut [Vec<f64>],
) -> f64 {
    let mut total = 0.0;
    for s in samples {
        forward_into(topology, weights, &s.input, acts);
        let out = acts.last().unwrap();
        total += out
            .iter()
            .zip(&s.target)
            .map(|(o, d)| (d - o) * (d - o))
            .sum::<f64>();
    }
    total / samples.len() as f64
}

/// Training-set MSE as a function of the flat weight vector.
#[derive(Debug, Clone)]
pub struct MseObjective<'a> {
    topology: &'a MlpTopology,
    samples: &'a [SamplePair],
}

impl<'a> MseObjective<'a> {
    pub fn new(topology: &'a MlpTopology, samples: &'a [SamplePair]) -> Result<Self, MlpError> {
        check_samples(topology, samples)?;
        Ok(Self { topology, samples })
    }

    pub fn dimension(&self) -> usize {
        self.topology.dimension()
    }

    /// NaN for a weight vector of the wrong length.
    pub fn evaluate(&self, weights: &[f64]) -> f64 {
        if weights.len() != self.topology.dimension() {
            return f64::NAN;
        }
        let mut acts = activation_buffers(self.topology);
        mse_unchecked(self.topology, weights, self.samples, &mut acts)
    }
}

/// Binds a topology and sample set into a pure objective for the optimizer.
pub fn as_objective<'a>(
    topology: &'a MlpTopology,
    samples: &'a [SamplePair],
) -> Result<impl Fn(&[f64]) -> f64 + Send + Sync + 'a, MlpError> {
    let objective = MseObjective::new(topology, samples)?;
    Ok(move |w: &[f64]| objective.evaluate(w))
}
