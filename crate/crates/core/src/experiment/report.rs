//! Report types and the files written for each run.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bp::StopReason;
use crate::data::{Aggregator, GapPolicy, RegionFilter, ScalerParams};
use crate::metrics::EvalReport;

use super::config::{BpSettings, Trainer, TrainerKind};
use super::ExperimentError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcSummarySettings {
    pub colony_size: usize,
    pub food_number: usize,
    pub limit: usize,
    pub mcn: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummarySettings {
    pub aggregator: Aggregator,
    pub gap_policy: GapPolicy,
    pub train_ratio: f64,
    pub region: RegionFilter,
}

/// Everything that determines the results. Paths are left out so that the
/// summary does not depend on where inputs and outputs live.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub topology: String,
    pub biases: bool,
    pub dimension: usize,
    pub trainer: Trainer,
    pub horizon: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub data: DataSummarySettings,
    pub abc: AbcSummarySettings,
    pub bp: BpSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub series_len: usize,
    pub window: usize,
    pub outputs: usize,
    pub train_samples: usize,
    pub test_samples: usize,
    pub scaler: ScalerParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    /// Cycle for ABC, epoch for BP.
    pub step: usize,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Effort {
    Abc {
        cycles: usize,
        objective_evaluations: u64,
        ofe_nominal: u64,
        scouts_replaced: u64,
    },
    Bp {
        epochs: usize,
        stop_reason: StopReason,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub train: EvalReport,
    pub test: EvalReport,
    pub effort: Effort,
    pub convergence: Vec<ConvergencePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Self {
            mean,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub train_mse: Spread,
    pub test_mse: Spread,
    pub test_nmse: Spread,
    pub test_accuracy_pct: Spread,
}

impl Aggregate {
    pub fn of(trials: &[TrialReport]) -> Self {
        Self {
            train_mse: Spread::of(trials.iter().map(|t| t.train.mse)),
            test_mse: Spread::of(trials.iter().map(|t| t.test.mse)),
            test_nmse: Spread::of(trials.iter().map(|t| t.test.nmse)),
            test_accuracy_pct: Spread::of(trials.iter().map(|t| t.test.accuracy_pct)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerResults {
    pub trainer: TrainerKind,
    pub trials: Vec<TrialReport>,
    pub aggregate: Aggregate,
}

/// One row of the network-structure-by-trainer grid of mean test MSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub topology: String,
    pub abc_mean_test_mse: Option<f64>,
    pub bp_mean_test_mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub settings: ReportSettings,
    pub dataset: DatasetSummary,
    pub results: Vec<TrainerResults>,
    pub comparison: Vec<ComparisonRow>,
}

impl RunReport {
    pub fn trainer(&self, kind: TrainerKind) -> Option<&TrainerResults> {
        self.results.iter().find(|r| r.trainer == kind)
    }

    pub fn to_json(&self) -> Result<String, ExperimentError> {
        serde_json::to_string_pretty(self).map_err(|e| ExperimentError::Output(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Output(e.to_string()))
    }
}

/// Trained weights plus what is needed to use them on raw magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub trainer: TrainerKind,
    pub trial: usize,
    pub seed: u64,
    pub topology: String,
    pub biases_enabled: bool,
    pub horizon: usize,
    pub values: Vec<f64>,
    pub scaler: ScalerParams,
}

/// One sample's raw actual and predicted values, one entry per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub index: usize,
    pub actual_raw: Vec<f64>,
    pub predicted_raw: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialArtifacts {
    pub model: ModelRecord,
    pub convergence: Vec<ConvergencePoint>,
    pub train_predictions: Vec<PredictionRow>,
    pub test_predictions: Vec<PredictionRow>,
}

/// Wall-clock time is kept out of the summary so reruns stay byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTiming {
    pub trainer: TrainerKind,
    pub trial: usize,
    pub wall_seconds: f64,
}

fn create(path: &Path) -> Result<BufWriter<File>, ExperimentError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| ExperimentError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), ExperimentError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| ExperimentError::io(path, e))
}

pub fn convergence_csv(points: &[ConvergencePoint]) -> String {
    let mut out = String::from("step,mse\n");
    for p in points {
        out.push_str(&format!("{},{}\n", p.step, p.mse));
    }
    out
}

/// `index,actual_raw,predicted_raw`; networks with several outputs get
/// extra `actual_raw_<k>,predicted_raw_<k>` pairs for outputs 2 and up.
pub fn predictions_csv(rows: &[PredictionRow]) -> String {
    let outputs = rows.first().map_or(1, |r| r.actual_raw.len());
    let mut out = String::from("index,actual_raw,predicted_raw");
    for k in 2..=outputs {
        out.push_str(&format!(",actual_raw_{k},predicted_raw_{k}"));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&r.index.to_string());
        for (a, p) in r.actual_raw.iter().zip(&r.predicted_raw) {
            out.push_str(&format!(",{a},{p}"));
        }
        out.push('\n');
    }
    out
}

/// Writes `summary.json` and `timing.json` into `dir`, and per-trial files
/// into `dir/<trainer>/`.
pub fn write_outputs(
    dir: &Path,
    report: &RunReport,
    artifacts: &[TrialArtifacts],
    timing: &[TrialTiming],
) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    write_text(&dir.join("summary.json"), &(report.to_json()? + "\n"))?;
    let timing_json =
        serde_json::to_string_pretty(timing).map_err(|e| ExperimentError::Output(e.to_string()))?;
    write_text(&dir.join("timing.json"), &(timing_json + "\n"))?;

    for a in artifacts {
        let sub = dir.join(a.model.trainer.as_str());
        fs::create_dir_all(&sub).map_err(|e| ExperimentError::io(&sub, e))?;
        let t = a.model.trial;
        let model = serde_json::to_string_pretty(&a.model)
            .map_err(|e| ExperimentError::Output(e.to_string()))?;
        write_text(&sub.join(format!("trial_{t}_model.json")), &(model + "\n"))?;
        write_text(
            &sub.join(format!("trial_{t}_convergence.csv")),
            &convergence_csv(&a.convergence),
        )?;
        write_text(
            &sub.join(format!("trial_{t}_predictions_train.csv")),
            &predictions_csv(&a.train_predictions),
        )?;
        write_text(
            &sub.join(format!("trial_{t}_predictions_test.csv")),
            &predictions_csv(&a.test_predictions),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_of_values() {
        let s = Spread::of([1.0, 4.0, 2.5]);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.max, 4.0);
    }

    #[test]
    fn csv_layouts() {
        let conv = convergence_csv(&[
            ConvergencePoint { step: 1, mse: 0.5 },
            ConvergencePoint { step: 2, mse: 0.25 },
        ]);
        assert_eq!(conv, "step,mse\n1,0.5\n2,0.25\n");

        let single = predictions_csv(&[PredictionRow {
            index: 0,
            actual_raw: vec![4.5],
            predicted_raw: vec![4.25],
        }]);
        assert_eq!(single, "index,actual_raw,predicted_raw\n0,4.5,4.25\n");

        let multi = predictions_csv(&[PredictionRow {
            index: 3,
            actual_raw: vec![1.0, 2.0],
            predicted_raw: vec![1.5, 2.5],
        }]);
        assert_eq!(
            multi,
            "index,actual_raw,predicted_raw,actual_raw_2,predicted_raw_2\n3,1,1.5,2,2.5\n"
        );
    }
}
