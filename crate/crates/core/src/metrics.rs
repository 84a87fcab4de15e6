//! Forecast error statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {actual} actual values vs {predicted} predicted")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("variance of the actual series is zero")]
    ConstantSeries,
    #[error("actual value at index {0} is zero; relative error undefined")]
    ZeroActual(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mse: f64,
    pub nmse: f64,
    pub accuracy_pct: f64,
    pub n: usize,
}

fn check_lengths(actual: usize, predicted: usize, needed: usize) -> Result<(), MetricsError> {
    if actual != predicted {
        return Err(MetricsError::LengthMismatch { actual, predicted });
    }
    if actual < needed {
        return Err(MetricsError::TooFew {
            needed,
            got: actual,
        });
    }
    Ok(())
}

/// Mean over samples of the summed squared residual across output components.
pub fn mse<A: AsRef<[f64]>, P: AsRef<[f64]>>(actual: &[A], predicted: &[P]) -> Result<f64, MetricsError> {
    check_lengths(actual.len(), predicted.len(), 1)?;
    let mut total = 0.0;
    for (a, p) in actual.iter().zip(predicted) {
        let (a, p) = (a.as_ref(), p.as_ref());
        check_lengths(a.len(), p.len(), 0)?;
        total += a.iter().zip(p).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    }
    Ok(total / actual.len() as f64)
}

/// Squared error normalized by `n` times the unbiased sample variance of
/// `actual`, so that predicting the mean scores `(n - 1) / n`.
pub fn nmse(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(actual.len(), predicted.len(), 2)?;
    let n = actual.len() as f64;
    let mean = actual.iter().sum::<f64>() / n;
    let spread: f64 = actual.iter().map(|y| (y - mean) * (y - mean)).sum();
    let variance = spread / (n - 1.0);
    if variance == 0.0 {
        return Err(MetricsError::ConstantSeries);
    }
    let sse: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p) * (y - p))
        .sum();
    Ok(sse / (n * variance))
}

/// `100 * (1 - mean relative absolute error)`, floored at zero.
pub fn accuracy_pct(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(actual.len(), predicted.len(), 1)?;
    let mut total = 0.0;
    for (i, (y, p)) in actual.iter().zip(predicted).enumerate() {
        if *y == 0.0 {
            return Err(MetricsError::ZeroActual(i));
        }
        total += (y - p).abs() / y.abs();
    }
    let mape = total / actual.len() as f64;
    Ok((100.0 * (1.0 - mape)).max(0.0))
}

/// MSE and NMSE on the scaled values, accuracy on the raw ones.
pub fn evaluate(
    scaled_actual: &[Vec<f64>],
    scaled_predicted: &[Vec<f64>],
    raw_actual: &[f64],
    raw_predicted: &[f64],
) -> Result<EvalReport, MetricsError> {
    let flat_actual: Vec<f64> = scaled_actual.iter().flatten().copied().collect();
    let flat_predicted: Vec<f64> = scaled_predicted.iter().flatten().copied().collect();
    Ok(EvalReport {
        mse: mse(scaled_actual, scaled_predicted)?,
        nmse: nmse(&flat_actual, &flat_predicted)?,
        accuracy_pct: accuracy_pct(raw_actual, raw_predicted)?,
        n: scaled_actual.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_cases() {
        let a = [vec![1.0], vec![0.0]];
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&a, &[vec![0.5], vec![0.5]]).unwrap(), 0.25);
        // outputs are summed, not averaged
        assert_eq!(mse(&[vec![1.0, 1.0]], &[vec![0.0, 0.0]]).unwrap(), 2.0);
        assert!(matches!(
            mse(&a, &[vec![0.0]]),
            Err(MetricsError::LengthMismatch { .. })
        ));
        let empty: [Vec<f64>; 0] = [];
        assert!(matches!(mse(&empty, &empty), Err(MetricsError::TooFew { .. })));
    }

    #[test]
    fn nmse_cases() {
        let y = [2.0, 5.0, 3.0, 9.0];
        assert_eq!(nmse(&y, &y).unwrap(), 0.0);
        assert_eq!(nmse(&[0.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        let mean = [4.75; 4];
        assert!((nmse(&y, &mean).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(nmse(&[3.0, 3.0], &[1.0, 2.0]), Err(MetricsError::ConstantSeries));
        assert!(matches!(nmse(&[1.0], &[1.0]), Err(MetricsError::TooFew { .. })));
    }

    #[test]
    fn accuracy_cases() {
        let y = [4.0, 5.0, 2.5];
        assert_eq!(accuracy_pct(&y, &y).unwrap(), 100.0);
        let off: Vec<f64> = y.iter().map(|v| v * 1.1).collect();
        assert!((accuracy_pct(&y, &off).unwrap() - 90.0).abs() < 1e-12);
        assert_eq!(accuracy_pct(&y, &[0.0; 3]).unwrap(), 0.0);
        assert_eq!(accuracy_pct(&y, &[-50.0; 3]).unwrap(), 0.0);
        assert_eq!(accuracy_pct(&[1.0, 0.0], &[1.0, 0.0]), Err(MetricsError::ZeroActual(1)));
    }
}
