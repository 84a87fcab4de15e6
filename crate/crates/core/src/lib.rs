//! Artificial bee colony training of small sigmoid MLPs for time-series
//! magnitude forecasting, with a backpropagation baseline.
//!
//! - [`abc`]: the bee colony optimizer over box-bounded vectors.
//! - [`mlp`]: the network, its flat parameterization and the MSE objective.
//! - [`bp`]: gradient descent with momentum on the same objective.
//! - [`data`]: catalog parsing, daily series, scaling, windows, splits.
//! - [`metrics`]: MSE, NMSE and accuracy.
//! - [`experiment`]: multi-trial comparison runs, synthetic catalogs and
//!   optimizer benchmarks.

pub mod abc;
pub mod bp;
pub mod data;
pub mod experiment;
pub mod metrics;
pub mod mlp;
pub mod rng;

pub use abc::{AbcConfig, AbcError, AbcResult, Bounds, FoodSource};
pub use bp::{BpConfig, BpError, TrainingHistory};
pub use mlp::{FlatWeights, MlpTopology, SamplePair};
pub use rng::RandomSource;
