//! Classic test functions for checking the optimizer on its own.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::abc::{self, AbcConfig, Bounds, CyclePoint};

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchFunction {
    Sphere,
    Rosenbrock,
    Rastrigin,
}

impl FromStr for BenchFunction {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sphere" => Ok(Self::Sphere),
            "rosenbrock" => Ok(Self::Rosenbrock),
            "rastrigin" => Ok(Self::Rastrigin),
            other => Err(ExperimentError::Config(format!(
                "unknown function {other:?}; expected sphere, rosenbrock or rastrigin"
            ))),
        }
    }
}

impl BenchFunction {
    pub fn evaluate(self, x: &[f64]) -> f64 {
        match self {
            Self::Sphere => x.iter().map(|v| v * v).sum(),
            Self::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum(),
            Self::Rastrigin => {
                10.0 * x.len() as f64
                    + x.iter()
                        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
                        .sum::<f64>()
            }
        }
    }

    /// Common search box for each function.
    pub fn default_bounds(self) -> (f64, f64) {
        match self {
            Self::Sphere => (-10.0, 10.0),
            Self::Rosenbrock => (-5.0, 10.0),
            Self::Rastrigin => (-5.12, 5.12),
        }
    }

    pub fn minimizer(self, dimension: usize) -> Vec<f64> {
        match self {
            Self::Rosenbrock => vec![1.0; dimension],
            Self::Sphere | Self::Rastrigin => vec![0.0; dimension],
        }
    }

    /// Every function here has minimum value 0.
    pub fn optimum(self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub function: BenchFunction,
    pub dimension: usize,
    pub mcn: usize,
    pub food_number: usize,
    pub seed: u64,
    pub best_objective: f64,
    pub gap_to_optimum: f64,
    pub distance_to_minimizer: f64,
    pub best_position: Vec<f64>,
    pub objective_evaluations: u64,
    pub ofe_nominal: u64,
    pub history: Vec<CyclePoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub mcn: usize,
    pub colony_size: usize,
    pub seed: u64,
    /// `None` uses the function's default box.
    pub bounds: Option<(f64, f64)>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            mcn: 1000,
            colony_size: AbcConfig::DEFAULT_COLONY_SIZE,
            seed: 1,
            bounds: None,
        }
    }
}

pub fn cmd_bench_abc(
    function: BenchFunction,
    dimension: usize,
    options: &BenchOptions,
) -> Result<BenchReport, ExperimentError> {
    let (lo, hi) = options.bounds.unwrap_or(function.default_bounds());
    let mut config = AbcConfig::new(Bounds::uniform(dimension, lo, hi)?, options.mcn, options.seed);
    config.colony_size = options.colony_size;
    let result = abc::run(&config, |x| function.evaluate(x))?;
    let distance = result
        .best_position
        .iter()
        .zip(function.minimizer(dimension))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(BenchReport {
        function,
        dimension,
        mcn: options.mcn,
        food_number: config.food_number(),
        seed: options.seed,
        best_objective: result.best_objective,
        gap_to_optimum: result.best_objective - function.optimum(),
        distance_to_minimizer: distance,
        best_position: result.best_position,
        objective_evaluations: result.objective_evaluations,
        ofe_nominal: result.ofe_nominal,
        history: result.history,
    })
}
