//! Deterministic synthetic catalogs in the bundled CSV schema.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use chrono::{Duration, NaiveDate};

use crate::data::{write_catalog, CatalogRecord};
use crate::rng::RandomSource;

use super::ExperimentError;

pub const MIN_LENGTH: usize = 100;
pub const MAGNITUDE_FLOOR: f64 = 2.0;
pub const MAGNITUDE_CEILING: f64 = 7.5;

/// Shape of the generated magnitude series: a baseline, a sinusoidal cycle
/// of about ten days and AR(1) noise. The period (in days) and the phase
/// are drawn uniformly from the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub baseline: f64,
    pub cycle_amplitude: f64,
    pub cycle_period: (f64, f64),
    pub ar_coefficient: f64,
    pub noise_sd: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            baseline: 4.6,
            cycle_amplitude: 1.2,
            cycle_period: (8.0, 12.0),
            ar_coefficient: 0.7,
            noise_sd: 0.03,
        }
    }
}

/// `length` daily events from 2010-01-01 with magnitudes clamped into
/// `[2.0, 7.5]` and coordinates inside the default Southern California box.
pub fn synthetic_catalog(length: usize, seed: u64) -> Result<Vec<CatalogRecord>, ExperimentError> {
    synthetic_catalog_with(length, seed, &SynthParams::default())
}

pub fn synthetic_catalog_with(
    length: usize,
    seed: u64,
    params: &SynthParams,
) -> Result<Vec<CatalogRecord>, ExperimentError> {
    if length < MIN_LENGTH {
        return Err(ExperimentError::Config(format!(
            "synthetic catalog needs at least {MIN_LENGTH} rows, got {length}"
        )));
    }
    let mut rng = RandomSource::new(seed);
    let cycle_period = rng.uniform(params.cycle_period.0, params.cycle_period.1);
    let cycle_phase = rng.uniform(0.0, 2.0 * PI);
    let start = NaiveDate::from_ymd_opt(2010, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
        .and_utc();

    let mut noise = 0.0;
    let mut records = Vec::with_capacity(length);
    for day in 0..length {
        let t = day as f64;
        noise = params.ar_coefficient * noise + params.noise_sd * rng.normal();
        let magnitude = params.baseline
            + params.cycle_amplitude * (2.0 * PI * t / cycle_period + cycle_phase).sin()
            + noise;
        let seconds = rng.index(86_400) as i64;
        records.push(CatalogRecord {
            timestamp: start + Duration::days(day as i64) + Duration::seconds(seconds),
            latitude: rng.uniform(32.5, 36.5),
            longitude: rng.uniform(-121.5, -114.5),
            depth: rng.uniform(0.5, 20.0),
            magnitude: magnitude.clamp(MAGNITUDE_FLOOR, MAGNITUDE_CEILING),
        });
    }
    Ok(records)
}

pub fn cmd_synth(length: usize, seed: u64, out: &Path) -> Result<(), ExperimentError> {
    let records = synthetic_catalog(length, seed)?;
    let file = File::create(out).map_err(|e| ExperimentError::io(out, e))?;
    write_catalog(BufWriter::new(file), &records)
        .map_err(|e| ExperimentError::Output(format!("{}: {e}", out.display())))
}
