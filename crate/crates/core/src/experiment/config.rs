//! Declarative experiment configuration.
//!
//! The file is TOML. Flat dotted keys address nested sections, so
//! `abc.mcn = 500` and an `[abc]` table with `mcn = 500` are the same thing.
//! Every key has a default; unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::abc::{AbcConfig, Bounds, Perturbation};
use crate::bp::BpConfig;
use crate::data::{Aggregator, GapPolicy, RegionFilter, WindowSpec};
use crate::mlp::MlpTopology;

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trainer {
    Abc,
    Bp,
    #[default]
    Both,
}

impl Trainer {
    pub fn kinds(self) -> &'static [TrainerKind] {
        match self {
            Trainer::Abc => &[TrainerKind::Abc],
            Trainer::Bp => &[TrainerKind::Bp],
            Trainer::Both => &[TrainerKind::Abc, TrainerKind::Bp],
        }
    }
}

impl FromStr for Trainer {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "abc" => Ok(Trainer::Abc),
            "bp" => Ok(Trainer::Bp),
            "both" => Ok(Trainer::Both),
            other => Err(ExperimentError::Config(format!(
                "unknown trainer {other:?}; expected abc, bp or both"
            ))),
        }
    }
}

/// A single trainer, as recorded in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainerKind {
    Abc,
    Bp,
}

impl TrainerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainerKind::Abc => "abc",
            TrainerKind::Bp => "bp",
        }
    }
}

impl fmt::Display for TrainerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSettings {
    pub catalog: PathBuf,
    pub aggregator: Aggregator,
    pub gap_policy: GapPolicy,
    pub train_ratio: f64,
    pub region: RegionFilter,
}

impl Default for DataSettings {
    fn default() -> Self {
        Self {
            catalog: PathBuf::from("data/sample_catalog.csv"),
            aggregator: Aggregator::default(),
            gap_policy: GapPolicy::default(),
            train_ratio: 0.7,
            region: RegionFilter::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbcSettings {
    pub colony_size: usize,
    pub mcn: usize,
    /// Defaults to `food_number * dimension` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
    pub lower: f64,
    pub upper: f64,
    pub perturbation: Perturbation,
}

impl Default for AbcSettings {
    fn default() -> Self {
        Self {
            colony_size: AbcConfig::DEFAULT_COLONY_SIZE,
            mcn: 1000,
            limit: None,
            lower: -10.0,
            upper: 10.0,
            perturbation: Perturbation::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpSettings {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub target_mse: f64,
    pub init_range: f64,
}

impl Default for BpSettings {
    fn default() -> Self {
        let d = BpConfig::default();
        Self {
            learning_rate: d.learning_rate,
            momentum: d.momentum,
            max_epochs: d.max_epochs,
            target_mse: d.target_mse,
            init_range: d.init_range,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: String,
    pub biases: bool,
    pub trainer: Trainer,
    pub horizon: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub data: DataSettings,
    pub abc: AbcSettings,
    pub bp: BpSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            topology: "3-3-1".into(),
            biases: true,
            trainer: Trainer::default(),
            horizon: 1,
            trials: 5,
            master_seed: 1,
            output_dir: PathBuf::from("out"),
            data: DataSettings::default(),
            abc: AbcSettings::default(),
            bp: BpSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.message().to_string()))
    }

    /// Reads a config file. A relative `data.catalog` is resolved against
    /// the directory holding the file.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        let mut config = Self::from_toml_str(&text)?;
        if config.data.catalog.is_relative() {
            if let Some(dir) = path.parent() {
                config.data.catalog = dir.join(&config.data.catalog);
            }
        }
        Ok(config)
    }

    pub fn network(&self) -> Result<MlpTopology, ExperimentError> {
        Ok(MlpTopology::parse(&self.topology)?.with_biases(self.biases))
    }

    pub fn window_spec(&self) -> Result<WindowSpec, ExperimentError> {
        let net = self.network()?;
        Ok(WindowSpec::new(net.inputs(), self.horizon, net.outputs())?)
    }

    /// `master_seed + trial`
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.master_seed.wrapping_add(trial as u64)
    }

    pub fn abc_config(&self, dimension: usize, seed: u64) -> Result<AbcConfig, ExperimentError> {
        let bounds = Bounds::uniform(dimension, self.abc.lower, self.abc.upper)?;
        let config = AbcConfig {
            colony_size: self.abc.colony_size,
            bounds,
            limit: self.abc.limit,
            mcn: self.abc.mcn,
            seed,
            perturbation: self.abc.perturbation,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn bp_config(&self, seed: u64) -> Result<BpConfig, ExperimentError> {
        let config = BpConfig {
            learning_rate: self.bp.learning_rate,
            momentum: self.bp.momentum,
            max_epochs: self.bp.max_epochs,
            target_mse: self.bp.target_mse,
            init_range: self.bp.init_range,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let net = self.network()?;
        self.window_spec()?;
        if self.trials == 0 {
            return Err(ExperimentError::Config("trials must be at least 1".into()));
        }
        if !(self.data.train_ratio > 0.0 && self.data.train_ratio < 1.0) {
            return Err(ExperimentError::Config(format!(
                "data.train_ratio must be in (0, 1), got {}",
                self.data.train_ratio
            )));
        }
        self.data.region.validate()?;
        self.abc_config(net.dimension(), self.master_seed)?;
        self.bp_config(self.master_seed)?;
        Ok(())
    }
}
