//! Test error counting, error curves and the two-proportion significance test.

use alloc::vec;
use alloc::vec::Vec;

use crate::boost::{argmax, BoostedModel, TrainingLog};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Misclassification summary of a model on a labelled set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n_test: usize,
    pub error_count: usize,
    pub error_rate: f64,
    pub num_classes: usize,
    /// `K x K` row-major counts; row = true class, column = predicted class.
    pub confusion: Vec<usize>,
}

impl EvalReport {
    pub fn confusion_row(&self, class: usize) -> &[usize] {
        &self.confusion[class * self.num_classes..(class + 1) * self.num_classes]
    }
}

/// Counts rows whose predicted class differs from the label.
pub fn error_count(model: &BoostedModel, test: &Dataset) -> Result<EvalReport> {
    let k = model.num_classes();
    if test.num_features() != model.num_features() {
        return Err(Error::DimensionMismatch {
            expected: model.num_features(),
            found: test.num_features(),
        });
    }
    if let Some(row) = test.labels().iter().position(|&y| y >= k) {
        return Err(Error::LabelOutOfRange {
            row,
            label: test.labels()[row],
            num_classes: k,
        });
    }
    let mut confusion = vec![0usize; k * k];
    let mut scores = vec![0.0; k];
    for (x, &y) in test.rows().zip(test.labels()) {
        scores.fill(0.0);
        model.accumulate_scores(x, &mut scores);
        confusion[y * k + argmax(&scores)] += 1;
    }
    let n_test = test.num_samples();
    let correct: usize = (0..k).map(|c| confusion[c * k + c]).sum();
    let error_count = n_test - correct;
    Ok(EvalReport {
        n_test,
        error_count,
        error_rate: error_count as f64 / n_test as f64,
        num_classes: k,
        confusion,
    })
}

/// Upper tail `P(Z > z)` of the standard normal.
///
/// Uses `erfc` from `libm` (fdlibm's rational approximations, accurate to
/// about one ulp across the whole range); values below the smallest normal
/// double are reported as 0.
pub fn normal_upper_tail(z: f64) -> f64 {
    let q = 0.5 * libm::erfc(z / core::f64::consts::SQRT_2);
    if q < f64::MIN_POSITIVE {
        0.0
    } else {
        q
    }
}

/// One-sided p-value that method 2 (with `e2` errors) has a lower error rate
/// than method 1 (with `e1` errors), both on the same `n` test rows.
///
/// Normal approximation to the difference of two binomial proportions with
/// each variance estimated separately as `p(1-p)/n`; no continuity
/// correction. When both variances vanish the result is 0.5 for equal counts
/// and 0 or 1 otherwise.
pub fn p_value(e1: u64, e2: u64, n: u64) -> Result<f64> {
    if n == 0 || e1 > n || e2 > n {
        return Err(Error::InvalidCounts { e1, e2, n });
    }
    let nf = n as f64;
    let p1 = e1 as f64 / nf;
    let p2 = e2 as f64 / nf;
    let variance = p1 * (1.0 - p1) / nf + p2 * (1.0 - p2) / nf;
    let diff = p1 - p2;
    if variance == 0.0 {
        return Ok(if diff > 0.0 {
            0.0
        } else if diff < 0.0 {
            1.0
        } else {
            0.5
        });
    }
    Ok(normal_upper_tail(diff / libm::sqrt(variance)))
}

/// One row of a training curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// 1-based.
    pub iteration: usize,
    pub train_loss: f64,
    pub test_errors: usize,
}

/// Per-iteration `(iteration, train_loss, test_errors)` series.
pub fn error_curve(log: &TrainingLog) -> Result<Vec<CurvePoint>> {
    if log.monitor_errors.is_empty() || log.monitor_errors.len() != log.losses.len() {
        return Err(Error::NoMonitorData);
    }
    Ok(log
        .losses
        .iter()
        .zip(&log.monitor_errors)
        .enumerate()
        .map(|(i, (&train_loss, &test_errors))| CurvePoint {
            iteration: i + 1,
            train_loss,
            test_errors,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boost::{Algorithm, TrainConfig};

    #[test]
    fn constant_model_on_balanced_set() {
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let ds = Dataset::new((0..30).map(f64::from).collect(), 1, labels, None).unwrap();
        let model = BoostedModel::empty(TrainConfig::new(Algorithm::Mart, 1), 3, 1);
        let report = error_count(&model, &ds).unwrap();
        assert_eq!(report.error_count, 20);
        assert_eq!(report.n_test, 30);
        assert!((report.error_rate - 2.0 / 3.0).abs() < 1e-15);
        for c in 0..3 {
            assert_eq!(report.confusion_row(c).iter().sum::<usize>(), 10);
            assert_eq!(report.confusion_row(c)[0], 10);
        }
    }

    #[test]
    fn rejects_dimension_and_label_mismatch() {
        let model = BoostedModel::empty(TrainConfig::new(Algorithm::Mart, 1), 2, 2);
        let ds = Dataset::new(vec![0.0, 1.0], 1, vec![0, 1], None).unwrap();
        assert!(matches!(
            error_count(&model, &ds),
            Err(Error::DimensionMismatch { .. })
        ));
        let ds = Dataset::new(vec![0.0, 1.0, 2.0, 3.0], 2, vec![0, 2], None).unwrap();
        assert!(matches!(
            error_count(&model, &ds),
            Err(Error::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn p_value_equal_counts() {
        assert_eq!(p_value(100, 100, 1000).unwrap(), 0.5);
        assert_eq!(p_value(0, 0, 10).unwrap(), 0.5);
        assert_eq!(p_value(10, 10, 10).unwrap(), 0.5);
    }

    #[test]
    fn p_value_degenerate_variances() {
        assert_eq!(p_value(10, 0, 10).unwrap(), 0.0);
        assert_eq!(p_value(0, 10, 10).unwrap(), 1.0);
    }

    #[test]
    fn p_value_rejects_bad_counts() {
        assert!(p_value(1001, 0, 1000).is_err());
        assert!(p_value(0, 1, 0).is_err());
    }

    #[test]
    fn p_value_underflows_to_zero() {
        assert_eq!(p_value(15404, 3679, 500_000).unwrap(), 0.0);
    }

    #[test]
    fn upper_tail_reference_values() {
        // Standard normal quantiles.
        assert!((normal_upper_tail(1.959963984540054) - 0.025).abs() < 1e-15);
        assert_eq!(normal_upper_tail(0.0), 0.5);
        assert!((normal_upper_tail(-1.959963984540054) - 0.975).abs() < 1e-15);
    }

    #[test]
    fn curve_passthrough() {
        let log = TrainingLog {
            initial_loss: 1.0,
            losses: vec![0.9, 0.8, 0.7],
            monitor_errors: vec![50, 40, 41],
            base_classes: vec![],
        };
        let curve = error_curve(&log).unwrap();
        let rows: Vec<(usize, usize)> =
            curve.iter().map(|p| (p.iteration, p.test_errors)).collect();
        assert_eq!(rows, [(1, 50), (2, 40), (3, 41)]);
        let empty = TrainingLog {
            monitor_errors: vec![],
            ..log
        };
        assert_eq!(error_curve(&empty).unwrap_err(), Error::NoMonitorData);
    }
}
