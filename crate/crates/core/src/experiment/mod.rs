//! Multi-trial training runs comparing the bee colony and backpropagation
//! trainers on the same windowed magnitude series.

pub mod bench;
pub mod config;
pub mod report;
pub mod synth;

use std::fmt;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::abc::{self, AbcError};
use crate::bp::{self, BpError};
use crate::data::{self, CatalogRecord, DataError, WindowedDataset};
use crate::metrics::{self, MetricsError};
use crate::mlp::{self, MlpError, MlpTopology, MseObjective, SamplePair};

pub use config::{ExperimentConfig, Trainer, TrainerKind};
pub use report::{
    Aggregate, ComparisonRow, ConvergencePoint, Effort, ModelRecord, PredictionRow, RunReport,
    TrainerResults, TrialArtifacts, TrialReport, TrialTiming,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Training,
    Evaluation,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Training => "training",
            Phase::Evaluation => "evaluation",
        })
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("output: {0}")]
    Output(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Mlp(#[from] MlpError),
    #[error(transparent)]
    Abc(#[from] AbcError),
    #[error(transparent)]
    Bp(#[from] BpError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{trainer} trial {trial} failed during {phase}: {source}")]
    Trial {
        trainer: TrainerKind,
        trial: usize,
        phase: Phase,
        #[source]
        source: Box<ExperimentError>,
    },
}

impl ExperimentError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Short stable identifier for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Io { .. } => "io",
            Self::Output(_) => "output",
            Self::Data(_) => "data",
            Self::Mlp(_) => "network",
            Self::Abc(_) => "abc",
            Self::Bp(_) => "bp",
            Self::Metrics(_) => "metrics",
            Self::Trial { .. } => "trial",
        }
    }
}

/// The windowed dataset and network shape shared by every trial.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub topology: MlpTopology,
    pub dataset: WindowedDataset,
    pub series_len: usize,
}

pub fn prepare(config: &ExperimentConfig, records: &[CatalogRecord]) -> Result<Prepared, ExperimentError> {
    config.validate()?;
    let topology = config.network()?;
    let series: Vec<f64> = data::daily_series(records, config.data.aggregator, config.data.gap_policy)
        .iter()
        .map(|d| d.value)
        .collect();
    let dataset = WindowedDataset::build(&series, config.window_spec()?, config.data.train_ratio)?;
    Ok(Prepared {
        topology,
        dataset,
        series_len: series.len(),
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub artifacts: Vec<TrialArtifacts>,
    pub timing: Vec<TrialTiming>,
}

impl RunOutcome {
    pub fn write(&self, dir: &Path) -> Result<(), ExperimentError> {
        report::write_outputs(dir, &self.report, &self.artifacts, &self.timing)
    }
}

/// Loads the configured catalog and runs every trial.
pub fn cmd_train(config: &ExperimentConfig) -> Result<RunOutcome, ExperimentError> {
    let records = data::load_catalog(&config.data.catalog, &config.data.region)?;
    run_with_records(config, &records)
}

pub fn run_with_records(
    config: &ExperimentConfig,
    records: &[CatalogRecord],
) -> Result<RunOutcome, ExperimentError> {
    let prepared = prepare(config, records)?;
    run_prepared(config, &prepared)
}

struct TrialOutput {
    kind: TrainerKind,
    report: TrialReport,
    artifacts: TrialArtifacts,
    timing: TrialTiming,
}

/// Trials are independent (each owns `master_seed + t`) and run in
/// parallel; results are collected in trainer then trial order.
pub fn run_prepared(config: &ExperimentConfig, prepared: &Prepared) -> Result<RunOutcome, ExperimentError> {
    let jobs: Vec<(TrainerKind, usize)> = config
        .trainer
        .kinds()
        .iter()
        .flat_map(|k| (0..config.trials).map(move |t| (*k, t)))
        .collect();
    let outputs = jobs
        .par_iter()
        .map(|&(kind, trial)| run_trial(config, prepared, kind, trial))
        .collect::<Result<Vec<_>, _>>()?;

    let mut results = Vec::new();
    let mut artifacts = Vec::new();
    let mut timing = Vec::new();
    for &kind in config.trainer.kinds() {
        let trials: Vec<TrialReport> = outputs
            .iter()
            .filter(|o| o.kind == kind)
            .map(|o| o.report.clone())
            .collect();
        let aggregate = Aggregate::of(&trials);
        results.push(TrainerResults {
            trainer: kind,
            trials,
            aggregate,
        });
    }
    for o in outputs {
        artifacts.push(o.artifacts);
        timing.push(o.timing);
    }

    let mean_for = |kind| {
        results
            .iter()
            .find(|r: &&TrainerResults| r.trainer == kind)
            .map(|r| r.aggregate.test_mse.mean)
    };
    let comparison = vec![ComparisonRow {
        topology: prepared.topology.to_string(),
        abc_mean_test_mse: mean_for(TrainerKind::Abc),
        bp_mean_test_mse: mean_for(TrainerKind::Bp),
    }];

    let dimension = prepared.topology.dimension();
    let abc_example = config.abc_config(dimension, config.master_seed)?;
    let ds = &prepared.dataset;
    let report = RunReport {
        settings: report::ReportSettings {
            topology: prepared.topology.to_string(),
            biases: config.biases,
            dimension,
            trainer: config.trainer,
            horizon: config.horizon,
            trials: config.trials,
            master_seed: config.master_seed,
            data: report::DataSummarySettings {
                aggregator: config.data.aggregator,
                gap_policy: config.data.gap_policy,
                train_ratio: config.data.train_ratio,
                region: config.data.region.clone(),
            },
            abc: report::AbcSummarySettings {
                colony_size: abc_example.colony_size,
                food_number: abc_example.food_number(),
                limit: abc_example.limit(),
                mcn: abc_example.mcn,
                lower: config.abc.lower,
                upper: config.abc.upper,
            },
            bp: config.bp.clone(),
        },
        dataset: report::DatasetSummary {
            series_len: prepared.series_len,
            window: ds.spec.window,
            outputs: ds.spec.outputs,
            train_samples: ds.train.len(),
            test_samples: ds.test.len(),
            scaler: ds.scaler,
        },
        results,
        comparison,
    };
    Ok(RunOutcome {
        report,
        artifacts,
        timing,
    })
}

struct Trained {
    weights: Vec<f64>,
    convergence: Vec<ConvergencePoint>,
    effort: Effort,
}

fn train_abc(config: &ExperimentConfig, prepared: &Prepared, seed: u64) -> Result<Trained, ExperimentError> {
    let objective = MseObjective::new(&prepared.topology, &prepared.dataset.train)?;
    let abc_config = config.abc_config(objective.dimension(), seed)?;
    let result = abc::run(&abc_config, |w| objective.evaluate(w))?;
    Ok(Trained {
        weights: result.best_position,
        convergence: result
            .history
            .iter()
            .map(|p| ConvergencePoint {
                step: p.cycle,
                mse: p.best_objective,
            })
            .collect(),
        effort: Effort::Abc {
            cycles: result.history.len(),
            objective_evaluations: result.objective_evaluations,
            ofe_nominal: result.ofe_nominal,
            scouts_replaced: result.scouts_replaced,
        },
    })
}

fn train_bp(config: &ExperimentConfig, prepared: &Prepared, seed: u64) -> Result<Trained, ExperimentError> {
    let bp_config = config.bp_config(seed)?;
    let (weights, history) = bp::train(&prepared.topology, &prepared.dataset.train, &bp_config)?;
    Ok(Trained {
        weights: weights.into_inner(),
        convergence: history
            .epochs
            .iter()
            .map(|p| ConvergencePoint {
                step: p.epoch,
                mse: p.mse,
            })
            .collect(),
        effort: Effort::Bp {
            epochs: history.epochs.len(),
            stop_reason: history.stop_reason,
        },
    })
}

struct Scored {
    report: metrics::EvalReport,
    rows: Vec<PredictionRow>,
}

fn score(
    prepared: &Prepared,
    weights: &[f64],
    samples: &[SamplePair],
    raw_targets: &[Vec<f64>],
) -> Result<Scored, ExperimentError> {
    let scaler = prepared.dataset.scaler;
    let predicted = mlp::predict_all(&prepared.topology, weights, samples)?;
    let actual: Vec<Vec<f64>> = samples.iter().map(|s| s.target.clone()).collect();
    let rows: Vec<PredictionRow> = predicted
        .iter()
        .zip(raw_targets)
        .enumerate()
        .map(|(index, (p, raw))| PredictionRow {
            index,
            actual_raw: raw.clone(),
            predicted_raw: p.iter().map(|y| scaler.invert(*y)).collect(),
        })
        .collect();
    let raw_actual: Vec<f64> = rows.iter().flat_map(|r| r.actual_raw.iter().copied()).collect();
    let raw_predicted: Vec<f64> = rows
        .iter()
        .flat_map(|r| r.predicted_raw.iter().copied())
        .collect();
    let report = metrics::evaluate(&actual, &predicted, &raw_actual, &raw_predicted)?;
    Ok(Scored { report, rows })
}

fn run_trial(
    config: &ExperimentConfig,
    prepared: &Prepared,
    kind: TrainerKind,
    trial: usize,
) -> Result<TrialOutput, ExperimentError> {
    let wrap = |phase| {
        move |e: ExperimentError| ExperimentError::Trial {
            trainer: kind,
            trial,
            phase,
            source: Box::new(e),
        }
    };
    let seed = config.trial_seed(trial);
    let started = Instant::now();
    let trained = match kind {
        TrainerKind::Abc => train_abc(config, prepared, seed),
        TrainerKind::Bp => train_bp(config, prepared, seed),
    }
    .map_err(wrap(Phase::Training))?;
    let wall_seconds = started.elapsed().as_secs_f64();

    let ds = &prepared.dataset;
    let train = score(prepared, &trained.weights, &ds.train, &ds.train_raw_targets)
        .map_err(wrap(Phase::Evaluation))?;
    let test = score(prepared, &trained.weights, &ds.test, &ds.test_raw_targets)
        .map_err(wrap(Phase::Evaluation))?;

    let model = ModelRecord {
        trainer: kind,
        trial,
        seed,
        topology: prepared.topology.to_string(),
        biases_enabled: prepared.topology.biases_enabled(),
        horizon: ds.spec.horizon,
        values: trained.weights,
        scaler: ds.scaler,
    };
    Ok(TrialOutput {
        kind,
        report: TrialReport {
            trial,
            seed,
            train: train.report,
            test: test.report,
            effort: trained.effort,
            convergence: trained.convergence.clone(),
        },
        artifacts: TrialArtifacts {
            model,
            convergence: trained.convergence,
            train_predictions: train.rows,
            test_predictions: test.rows,
        },
        timing: TrialTiming {
            trainer: kind,
            trial,
            wall_seconds,
        },
    })
}
