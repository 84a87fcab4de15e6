//! Catalog ingestion, daily magnitude series, scaling and windowing.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mlp::SamplePair;

pub const CATALOG_HEADER: [&str; 5] = ["datetime", "latitude", "longitude", "depth", "magnitude"];
const DATETIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("catalog has no records inside the region and date window")]
    EmptyCatalog,
    #[error("scaler needs at least two distinct training values")]
    DegenerateScaler,
    #[error("series too short: need at least {required} values, got {actual}")]
    InsufficientData { required: usize, actual: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub timestamp: DateTime<Utc>,
    pub latitude: f64,
    pub longitude: f64,
    pub depth: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionFilter {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub date_min: NaiveDate,
    pub date_max: NaiveDate,
}

impl Default for RegionFilter {
    /// Southern California, 2010-01-01 through 2011-05-30.
    fn default() -> Self {
        Self {
            lat_min: 32.0,
            lat_max: 37.0,
            lon_min: -122.0,
            lon_max: -114.0,
            date_min: NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
            date_max: NaiveDate::from_ymd_opt(2011, 5, 30).unwrap(),
        }
    }
}

impl RegionFilter {
    pub fn validate(&self) -> Result<(), DataError> {
        if !(self.lat_min < self.lat_max && self.lon_min < self.lon_max) {
            return Err(DataError::Config(format!(
                "region box needs lat_min < lat_max and lon_min < lon_max, got lat [{}, {}] lon [{}, {}]",
                self.lat_min, self.lat_max, self.lon_min, self.lon_max
            )));
        }
        if self.date_min >= self.date_max {
            return Err(DataError::Config(format!(
                "date_min {} must precede date_max {}",
                self.date_min, self.date_max
            )));
        }
        Ok(())
    }

    /// Inclusive on every edge.
    pub fn contains(&self, r: &CatalogRecord) -> bool {
        let day = r.timestamp.date_naive();
        (self.lat_min..=self.lat_max).contains(&r.latitude)
            && (self.lon_min..=self.lon_max).contains(&r.longitude)
            && (self.date_min..=self.date_max).contains(&day)
    }
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.format(DATETIME_FORMAT).to_string()
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, i: usize, line: u64) -> Result<T, DataError> {
    let raw = record.get(i).unwrap_or("").trim();
    raw.parse().map_err(|_| DataError::Parse {
        line,
        message: format!("{} {raw:?} is not a number", CATALOG_HEADER[i]),
    })
}

fn parse_row(record: &csv::StringRecord, line: u64) -> Result<CatalogRecord, DataError> {
    if record.len() != CATALOG_HEADER.len() {
        return Err(DataError::Parse {
            line,
            message: format!("expected {} fields, got {}", CATALOG_HEADER.len(), record.len()),
        });
    }
    let stamp = record.get(0).unwrap().trim();
    let timestamp = NaiveDateTime::parse_from_str(stamp, DATETIME_FORMAT)
        .map_err(|e| DataError::Parse {
            line,
            message: format!("datetime {stamp:?}: {e}"),
        })?
        .and_utc();
    let rec = CatalogRecord {
        timestamp,
        latitude: parse_field(record, 1, line)?,
        longitude: parse_field(record, 2, line)?,
        depth: parse_field(record, 3, line)?,
        magnitude: parse_field(record, 4, line)?,
    };
    let bad = |message: String| Err(DataError::Parse { line, message });
    if !rec.magnitude.is_finite() {
        return bad(format!("magnitude {} is not finite", rec.magnitude));
    }
    if !rec.depth.is_finite() {
        return bad(format!("depth {} is not finite", rec.depth));
    }
    if !(-90.0..=90.0).contains(&rec.latitude) {
        return bad(format!("latitude {} outside [-90, 90]", rec.latitude));
    }
    if !(-180.0..=180.0).contains(&rec.longitude) {
        return bad(format!("longitude {} outside [-180, 180]", rec.longitude));
    }
    Ok(rec)
}

/// Parses catalog CSV text, keeping the rows `filter` accepts, sorted by time.
pub fn parse_catalog<R: Read>(reader: R, filter: &RegionFilter) -> Result<Vec<CatalogRecord>, DataError> {
    filter.validate()?;
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = csv.headers().map_err(|e| DataError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != CATALOG_HEADER {
        return Err(DataError::Parse {
            line: 1,
            message: format!("expected header {:?}, got {names:?}", CATALOG_HEADER.join(",")),
        });
    }

    let mut records = Vec::new();
    for row in csv.records() {
        let row = row.map_err(|e| DataError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let rec = parse_row(&row, line)?;
        if filter.contains(&rec) {
            records.push(rec);
        }
    }
    if records.is_empty() {
        return Err(DataError::EmptyCatalog);
    }
    records.sort_by_key(|r| r.timestamp);
    Ok(records)
}

pub fn load_catalog(path: &Path, filter: &RegionFilter) -> Result<Vec<CatalogRecord>, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_catalog(file, filter)
}

pub fn write_catalog<W: Write>(writer: W, records: &[CatalogRecord]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    w.write_record(CATALOG_HEADER)?;
    for r in records {
        w.write_record([
            format_timestamp(&r.timestamp),
            format!("{:.4}", r.latitude),
            format!("{:.4}", r.longitude),
            format!("{:.2}", r.depth),
            format!("{:.2}", r.magnitude),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    #[default]
    Max,
    Mean,
    Count,
}

/// What a calendar day with no events contributes to the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapPolicy {
    #[default]
    CarryForward,
    Skip,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyValue {
    pub date: NaiveDate,
    pub value: f64,
}

fn aggregate(values: &[f64], aggregator: Aggregator) -> f64 {
    match aggregator {
        Aggregator::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Aggregator::Mean => values.iter().sum::<f64>() / values.len() as f64,
        Aggregator::Count => values.len() as f64,
    }
}

/// One value per calendar day from the first to the last record's day.
/// `records` must be sorted by timestamp.
pub fn daily_series(records: &[CatalogRecord], aggregator: Aggregator, gaps: GapPolicy) -> Vec<DailyValue> {
    let mut out = Vec::new();
    let Some(first) = records.first() else {
        return out;
    };
    let mut day = first.timestamp.date_naive();
    let mut idx = 0;
    let mut today = Vec::new();
    let mut last: Option<f64> = None;
    while idx < records.len() {
        today.clear();
        while idx < records.len() && records[idx].timestamp.date_naive() == day {
            today.push(records[idx].magnitude);
            idx += 1;
        }
        let value = if today.is_empty() {
            match gaps {
                GapPolicy::CarryForward => last,
                GapPolicy::Skip => None,
                GapPolicy::Zero => Some(0.0),
            }
        } else {
            Some(aggregate(&today, aggregator))
        };
        if let Some(value) = value {
            out.push(DailyValue { date: day, value });
            last = Some(value);
        }
        day = day.succ_opt().expect("date in chrono range");
    }
    out
}

/// Min-max mapping of the training range onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub observed_min: f64,
    pub observed_max: f64,
}

impl ScalerParams {
    pub fn fit(values: &[f64]) -> Result<Self, DataError> {
        let observed_min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let observed_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(observed_min.is_finite() && observed_max.is_finite() && observed_min < observed_max) {
            return Err(DataError::DegenerateScaler);
        }
        Ok(Self {
            observed_min,
            observed_max,
        })
    }

    /// Values outside the fitted range clamp to the nearest end.
    pub fn apply(&self, x: f64) -> f64 {
        ((x - self.observed_min) / self.span()).clamp(0.0, 1.0)
    }

    pub fn invert(&self, y: f64) -> f64 {
        self.observed_min + y * self.span()
    }

    fn span(&self) -> f64 {
        self.observed_max - self.observed_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Lagged inputs per sample.
    pub window: usize,
    /// Steps ahead of the last input that the first target sits.
    pub horizon: usize,
    /// Consecutive targets per sample, starting at the horizon.
    pub outputs: usize,
}

impl WindowSpec {
    pub fn new(window: usize, horizon: usize, outputs: usize) -> Result<Self, DataError> {
        if window == 0 || outputs == 0 {
            return Err(DataError::Config("window and outputs must be positive".into()));
        }
        if !(1..=5).contains(&horizon) {
            return Err(DataError::Config(format!("horizon must be in 1..=5, got {horizon}")));
        }
        Ok(Self {
            window,
            horizon,
            outputs,
        })
    }

    /// Positions from the first input to the last target of one sample.
    fn span(&self) -> usize {
        self.window + self.horizon + self.outputs - 1
    }

    pub fn sample_count(&self, series_len: usize) -> usize {
        (series_len + 1).saturating_sub(self.span())
    }

    /// Series position of target `j` of sample `t`.
    pub fn target_position(&self, t: usize, j: usize) -> usize {
        t + self.window - 1 + self.horizon + j
    }
}

/// Slides the window over `series`. Sample `t` takes inputs at
/// `t..t+window` and targets starting at `t + window - 1 + horizon`.
pub fn make_windows(series: &[f64], spec: WindowSpec) -> Result<Vec<SamplePair>, DataError> {
    let count = spec.sample_count(series.len());
    if count == 0 {
        return Err(DataError::InsufficientData {
            required: spec.span(),
            actual: series.len(),
        });
    }
    Ok((0..count)
        .map(|t| SamplePair {
            input: series[t..t + spec.window].to_vec(),
            target: (0..spec.outputs)
                .map(|j| series[spec.target_position(t, j)])
                .collect(),
        })
        .collect())
}

/// Chronological split at `floor(ratio * len)`.
pub fn split<T: Clone>(items: &[T], ratio: f64) -> (Vec<T>, Vec<T>) {
    let cut = split_point(items.len(), ratio);
    (items[..cut].to_vec(), items[cut..].to_vec())
}

pub fn split_point(len: usize, ratio: f64) -> usize {
    ((ratio * len as f64).floor() as usize).min(len)
}

/// Shortest series that leaves one training and two test samples.
pub fn minimum_series_len(spec: WindowSpec, train_ratio: f64) -> usize {
    let mut count = 1;
    loop {
        let n_train = split_point(count, train_ratio);
        if n_train >= 1 && count > n_train + spec.outputs {
            return count + spec.span() - 1;
        }
        count += 1;
    }
}

/// Scaled train/test samples plus everything needed to undo the scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedDataset {
    pub train: Vec<SamplePair>,
    pub test: Vec<SamplePair>,
    pub spec: WindowSpec,
    pub scaler: ScalerParams,
    /// Raw (unscaled) targets aligned with `train` and `test`.
    pub train_raw_targets: Vec<Vec<f64>>,
    pub test_raw_targets: Vec<Vec<f64>>,
    /// Raw series positions `0..training_end` are the only ones the scaler saw.
    pub training_end: usize,
    /// Sample index (into the full window sequence) of the first test sample.
    pub test_start: usize,
}

impl WindowedDataset {
    /// Windows `raw` and splits it chronologically. The scaler is fitted on
    /// the raw values that appear in training samples. With several outputs
    /// the `outputs - 1` samples after the split point are dropped so that
    /// no test target was ever a training target.
    pub fn build(raw: &[f64], spec: WindowSpec, train_ratio: f64) -> Result<Self, DataError> {
        if !(train_ratio > 0.0 && train_ratio < 1.0) {
            return Err(DataError::Config(format!(
                "train ratio must be in (0, 1), got {train_ratio}"
            )));
        }
        let count = spec.sample_count(raw.len());
        let n_train = split_point(count, train_ratio);
        let test_start = n_train + spec.outputs - 1;
        if n_train == 0 || count < test_start + 2 {
            return Err(DataError::InsufficientData {
                required: minimum_series_len(spec, train_ratio),
                actual: raw.len(),
            });
        }
        let training_end = spec.target_position(n_train - 1, spec.outputs - 1) + 1;
        let scaler = ScalerParams::fit(&raw[..training_end])?;
        let scaled: Vec<f64> = raw.iter().map(|x| scaler.apply(*x)).collect();
        let windows = make_windows(&scaled, spec)?;
        let raw_targets = |t: usize| -> Vec<f64> {
            (0..spec.outputs)
                .map(|j| raw[spec.target_position(t, j)])
                .collect()
        };
        Ok(Self {
            train: windows[..n_train].to_vec(),
            test: windows[test_start..].to_vec(),
            spec,
            scaler,
            train_raw_targets: (0..n_train).map(raw_targets).collect(),
            test_raw_targets: (test_start..count).map(raw_targets).collect(),
            training_end,
            test_start,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "datetime,latitude,longitude,depth,magnitude\n";

    fn catalog(rows: &str) -> Result<Vec<CatalogRecord>, DataError> {
        parse_catalog(format!("{HEADER}{rows}").as_bytes(), &RegionFilter::default())
    }

    fn rec(stamp: &str, mag: f64) -> CatalogRecord {
        CatalogRecord {
            timestamp: NaiveDateTime::parse_from_str(stamp, DATETIME_FORMAT).unwrap().and_utc(),
            latitude: 34.0,
            longitude: -118.0,
            depth: 5.0,
            magnitude: mag,
        }
    }

    #[test]
    fn filters_outside_box() {
        let rows = "2010-03-01T10:00:00Z,34.0,-118.0,5.0,3.1\n\
                    2010-03-02T10:00:00Z,40.0,-118.0,5.0,3.5\n\
                    2010-03-03T10:00:00Z,33.0,-116.5,8.0,2.2\n";
        let r = catalog(rows).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].magnitude, 2.2);
    }

    #[test]
    fn filters_outside_dates() {
        let rows = "2009-12-31T23:59:59Z,34.0,-118.0,5.0,3.1\n\
                    2011-05-30T23:00:00Z,34.0,-118.0,5.0,3.5\n\
                    2011-05-31T00:00:00Z,34.0,-118.0,5.0,3.6\n";
        let r = catalog(rows).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].magnitude, 3.5);
    }

    #[test]
    fn sorts_by_time() {
        let rows = "2010-03-02T10:00:00Z,34.0,-118.0,5.0,3.5\n\
                    2010-03-01T10:00:00Z,34.0,-118.0,5.0,3.1\n";
        let r = catalog(rows).unwrap();
        assert!(r[0].timestamp < r[1].timestamp);
    }

    #[test]
    fn header_only_is_empty() {
        assert!(matches!(catalog(""), Err(DataError::EmptyCatalog)));
    }

    #[test]
    fn malformed_rows_report_line() {
        let rows = "2010-03-01T10:00:00Z,34.0,-118.0,5.0,3.1\n\
                    2010-03-02T10:00:00Z,34.0,-118.0,5.0,big\n";
        match catalog(rows) {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match catalog("03/01/2010,34.0,-118.0,5.0,3.1\n") {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            catalog("2010-03-01T10:00:00Z,95.0,-118.0,5.0,3.1\n"),
            Err(DataError::Parse { .. })
        ));
        assert!(matches!(
            parse_catalog("time,lat,lon,depth,mag\n".as_bytes(), &RegionFilter::default()),
            Err(DataError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn catalog_write_then_read() {
        let recs = vec![rec("2010-03-01T10:00:00Z", 3.1), rec("2010-03-02T11:30:05Z", 4.25)];
        let mut buf = Vec::new();
        write_catalog(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("datetime,latitude,longitude,depth,magnitude\n"));
        assert_eq!(parse_catalog(buf.as_slice(), &RegionFilter::default()).unwrap(), recs);
    }

    #[test]
    fn daily_aggregation() {
        let recs = vec![rec("2010-03-01T01:00:00Z", 3.1), rec("2010-03-01T05:00:00Z", 4.2)];
        let max = daily_series(&recs, Aggregator::Max, GapPolicy::CarryForward);
        assert_eq!(max.len(), 1);
        assert_eq!(max[0].value, 4.2);
        let mean = daily_series(&recs, Aggregator::Mean, GapPolicy::CarryForward);
        assert!((mean[0].value - 3.65).abs() < 1e-12);
        let count = daily_series(&recs, Aggregator::Count, GapPolicy::CarryForward);
        assert_eq!(count[0].value, 2.0);
    }

    #[test]
    fn gap_policies() {
        let recs = vec![rec("2010-03-01T01:00:00Z", 3.1), rec("2010-03-03T05:00:00Z", 4.2)];
        let values = |g| -> Vec<f64> {
            daily_series(&recs, Aggregator::Max, g)
                .iter()
                .map(|d| d.value)
                .collect()
        };
        assert_eq!(values(GapPolicy::CarryForward), vec![3.1, 3.1, 4.2]);
        assert_eq!(values(GapPolicy::Zero), vec![3.1, 0.0, 4.2]);
        assert_eq!(values(GapPolicy::Skip), vec![3.1, 4.2]);
        let dates = daily_series(&recs, Aggregator::Max, GapPolicy::CarryForward);
        assert_eq!(dates[1].date, NaiveDate::from_ymd_opt(2010, 3, 2).unwrap());
    }

    #[test]
    fn scaler_cases() {
        let s = ScalerParams::fit(&[2.0, 7.0, 3.0]).unwrap();
        assert_eq!(s.apply(2.0), 0.0);
        assert_eq!(s.apply(7.0), 1.0);
        assert_eq!(s.apply(4.5), 0.5);
        assert!((s.invert(s.apply(3.3)) - 3.3).abs() < 1e-12);
        assert_eq!(s.apply(9.0), 1.0);
        assert_eq!(s.apply(-1.0), 0.0);
        assert!(matches!(ScalerParams::fit(&[4.0, 4.0]), Err(DataError::DegenerateScaler)));
        assert!(matches!(ScalerParams::fit(&[]), Err(DataError::DegenerateScaler)));
    }

    #[test]
    fn window_index_arithmetic() {
        let series: Vec<f64> = (0..10).map(f64::from).collect();
        let w = make_windows(&series, WindowSpec::new(3, 1, 1).unwrap()).unwrap();
        assert_eq!(w.len(), 7);
        assert_eq!(w[0].input, vec![0.0, 1.0, 2.0]);
        assert_eq!(w[0].target, vec![3.0]);
        let w5 = make_windows(&series, WindowSpec::new(3, 5, 1).unwrap()).unwrap();
        assert_eq!(w5.len(), 3);
        assert_eq!(w5[0].target, vec![7.0]);
        let multi = make_windows(&series, WindowSpec::new(4, 1, 4).unwrap()).unwrap();
        assert_eq!(multi.len(), 3);
        assert_eq!(multi[0].target, vec![4.0, 5.0, 6.0, 7.0]);
        match make_windows(&series[..3], WindowSpec::new(3, 1, 1).unwrap()) {
            Err(DataError::InsufficientData { required, actual }) => {
                assert_eq!((required, actual), (4, 3))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn split_floor_rule() {
        let items: Vec<usize> = (0..10).collect();
        let (train, test) = split(&items, 0.7);
        assert_eq!(train, (0..7).collect::<Vec<_>>());
        assert_eq!(test, vec![7, 8, 9]);
        assert_eq!(split_point(11, 0.7), 7);
    }

    #[test]
    fn horizon_range_checked() {
        assert!(WindowSpec::new(3, 0, 1).is_err());
        assert!(WindowSpec::new(3, 6, 1).is_err());
        assert!(WindowSpec::new(0, 1, 1).is_err());
    }

    #[test]
    fn dataset_build_basic() {
        let raw: Vec<f64> = (0..40).map(|i| 3.0 + (i as f64 * 0.7).sin()).collect();
        let spec = WindowSpec::new(3, 1, 1).unwrap();
        let ds = WindowedDataset::build(&raw, spec, 0.7).unwrap();
        assert_eq!(ds.train.len() + ds.test.len(), 37);
        assert_eq!(ds.train.len(), 25);
        assert_eq!(ds.training_end, 28);
        assert_eq!(ds.test_raw_targets[0], vec![raw[28]]);
        assert_eq!(ds.test[0].target[0], ds.scaler.apply(raw[28]));
    }

    #[test]
    fn multi_output_purges_boundary() {
        let raw: Vec<f64> = (0..60).map(|i| (i as f64 * 0.3).cos()).collect();
        let spec = WindowSpec::new(4, 1, 4).unwrap();
        let ds = WindowedDataset::build(&raw, spec, 0.7).unwrap();
        let count = spec.sample_count(raw.len());
        assert_eq!(ds.train.len(), split_point(count, 0.7));
        assert_eq!(ds.test.len(), count - ds.train.len() - 3);
        let last_train_target = spec.target_position(ds.train.len() - 1, 3);
        let first_test_target = spec.target_position(ds.test_start, 0);
        assert!(last_train_target < first_test_target);
    }

    #[test]
    fn dataset_too_short() {
        let raw = [1.0, 2.0, 3.0, 4.0, 5.0];
        let spec = WindowSpec::new(3, 1, 1).unwrap();
        assert!(matches!(
            WindowedDataset::build(&raw, spec, 0.7),
            Err(DataError::InsufficientData { required: 7, actual: 5 })
        ));
        let ok: Vec<f64> = (0..7).map(f64::from).collect();
        assert!(WindowedDataset::build(&ok, spec, 0.7).is_ok());
    }
}
