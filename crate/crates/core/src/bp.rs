//! Full-batch backpropagation with heavy-ball momentum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mlp::{self, check_samples, FlatWeights, MlpError, MlpTopology, SamplePair};
use crate::rng::RandomSource;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BpError {
    #[error(transparent)]
    Mlp(#[from] MlpError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch}: mse = {mse}")]
    Diverged { epoch: usize, mse: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub target_mse: f64,
    /// Initial weights are uniform on `[-init_range, init_range]`.
    pub init_range: f64,
    pub seed: u64,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.6,
            momentum: 0.5,
            max_epochs: 3000,
            target_mse: 1e-4,
            init_range: 1.0,
            seed: 0,
        }
    }
}

impl BpConfig {
    pub fn validate(&self) -> Result<(), BpError> {
        // lr = 0 is allowed: it freezes the weights, which is useful for tests.
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(BpError::Config(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(BpError::Config(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.target_mse.is_nan() || self.target_mse <= 0.0 {
            return Err(BpError::Config(format!(
                "target_mse must be positive, got {}",
                self.target_mse
            )));
        }
        if self.max_epochs == 0 {
            return Err(BpError::Config("max_epochs must be at least 1".into()));
        }
        if !(self.init_range >= 0.0 && self.init_range.is_finite()) {
            return Err(BpError::Config(format!(
                "init_range must be finite and non-negative, got {}",
                self.init_range
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    MaxEpochs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochPoint {
    pub epoch: usize,
    pub mse: f64,
}

/// Training MSE measured at the start of each epoch, before that epoch's update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochPoint>,
    pub stop_reason: StopReason,
}

fn layer_offsets(topology: &MlpTopology) -> Vec<usize> {
    let mut offsets = Vec::new();
    let mut offset = 0;
    for w in topology.layer_sizes().windows(2) {
        offsets.push(offset);
        offset += w[0] * w[1] + if topology.biases_enabled() { w[1] } else { 0 };
    }
    offsets
}

/// Batch MSE and its gradient with respect to every flat parameter.
pub fn loss_and_gradient(
    topology: &MlpTopology,
    weights: &[f64],
    samples: &[SamplePair],
) -> Result<(f64, Vec<f64>), BpError> {
    if weights.len() != topology.dimension() {
        return Err(MlpError::Shape {
            what: "weights",
            expected: topology.dimension(),
            actual: weights.len(),
        }
        .into());
    }
    check_samples(topology, samples)?;

    let sizes = topology.layer_sizes();
    let offsets = layer_offsets(topology);
    let n = samples.len() as f64;
    let mut grad = vec![0.0; weights.len()];
    let mut acts = mlp::activation_buffers(topology);
    let mut delta: Vec<f64> = Vec::new();
    let mut prev_delta: Vec<f64> = Vec::new();
    let mut loss = 0.0;

    for s in samples {
        mlp::forward_into(topology, weights, &s.input, &mut acts);
        let out = acts.last().unwrap();
        delta.clear();
        for (o, d) in out.iter().zip(&s.target) {
            let r = d - o;
            loss += r * r;
            // dE/dz for E = (1/n) sum (d - o)^2 and o = sigmoid(z)
            delta.push(-2.0 / n * r * o * (1.0 - o));
        }

        for l in (1..sizes.len()).rev() {
            let (src, dst) = (sizes[l - 1], sizes[l]);
            let base = offsets[l - 1];
            let x = &acts[l - 1];
            for d in 0..dst {
                let row = &mut grad[base + d * src..base + (d + 1) * src];
                for (g, xv) in row.iter_mut().zip(x) {
                    *g += delta[d] * xv;
                }
            }
            if topology.biases_enabled() {
                let bias_base = base + src * dst;
                for d in 0..dst {
                    grad[bias_base + d] += delta[d];
                }
            }
            if l > 1 {
                prev_delta.clear();
                for (si, a) in x.iter().enumerate() {
                    let back: f64 = (0..dst)
                        .map(|d| weights[base + d * src + si] * delta[d])
                        .sum();
                    prev_delta.push(back * a * (1.0 - a));
                }
                std::mem::swap(&mut delta, &mut prev_delta);
            }
        }
    }
    Ok((loss / n, grad))
}

pub fn gradient(
    topology: &MlpTopology,
    weights: &[f64],
    samples: &[SamplePair],
) -> Result<Vec<f64>, BpError> {
    loss_and_gradient(topology, weights, samples).map(|(_, g)| g)
}

pub fn initial_weights(topology: &MlpTopology, init_range: f64, rng: &mut RandomSource) -> FlatWeights {
    let values = (0..topology.dimension())
        .map(|_| rng.uniform(-init_range, init_range))
        .collect();
    FlatWeights::new(topology, values).expect("length matches topology")
}

/// Trains from uniform random initial weights drawn with `config.seed`.
pub fn train(
    topology: &MlpTopology,
    samples: &[SamplePair],
    config: &BpConfig,
) -> Result<(FlatWeights, TrainingHistory), BpError> {
    config.validate()?;
    let mut rng = RandomSource::new(config.seed);
    let init = initial_weights(topology, config.init_range, &mut rng);
    train_from(topology, samples, config, init)
}

/// Trains from the given starting weights; `config.seed` is not used.
pub fn train_from(
    topology: &MlpTopology,
    samples: &[SamplePair],
    config: &BpConfig,
    init: FlatWeights,
) -> Result<(FlatWeights, TrainingHistory), BpError> {
    config.validate()?;
    let mut weights = init.into_inner();
    let mut step = vec![0.0; weights.len()];
    let mut epochs = Vec::new();

    for epoch in 1..=config.max_epochs {
        let (mse, grad) = loss_and_gradient(topology, &weights, samples)?;
        if !mse.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(BpError::Diverged { epoch, mse });
        }
        epochs.push(EpochPoint { epoch, mse });
        if mse <= config.target_mse {
            let weights = FlatWeights::new(topology, weights)?;
            return Ok((
                weights,
                TrainingHistory {
                    epochs,
                    stop_reason: StopReason::TargetReached,
                },
            ));
        }
        for ((w, dw), g) in weights.iter_mut().zip(step.iter_mut()).zip(&grad) {
            *dw = -config.learning_rate * g + config.momentum * *dw;
            *w += *dw;
        }
    }

    let weights = FlatWeights::new(topology, weights)?;
    Ok((
        weights,
        TrainingHistory {
            epochs,
            stop_reason: StopReason::MaxEpochs,
        },
    ))
}
