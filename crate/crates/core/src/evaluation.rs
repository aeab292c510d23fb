//! Sequence-level classification and metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{sequence_statistic, AnomalyScore, LabelValue, ModelError};
use crate::thresholding::Threshold;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("prediction count {pred} does not match truth count {truth}")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("cannot aggregate an empty list of values")]
    EmptyAggregate,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn tally(pred: &[LabelValue], truth: &[LabelValue]) -> Result<Self, EvalError> {
        if pred.len() != truth.len() {
            return Err(EvalError::LengthMismatch {
                pred: pred.len(),
                truth: truth.len(),
            });
        }
        let mut c = Self::default();
        for (p, t) in pred.iter().zip(truth) {
            match (p.is_anomalous(), t.is_anomalous()) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn scores(&self) -> Prf1 {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf1 {
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Anomalous iff the sequence statistic strictly exceeds the threshold.
pub fn classify(score: &AnomalyScore, tau: &Threshold) -> Result<LabelValue, EvalError> {
    Ok(classify_statistic(sequence_statistic(score)?, tau.value))
}

pub fn classify_statistic(statistic: f64, tau: f64) -> LabelValue {
    if statistic > tau {
        LabelValue::Anomalous
    } else {
        LabelValue::Nominal
    }
}

/// Precision, recall and F1 with anomalous as the positive class. Undefined ratios are 0.
pub fn prf1(pred: &[LabelValue], truth: &[LabelValue]) -> Result<Prf1, EvalError> {
    Ok(ConfusionCounts::tally(pred, truth)?.scores())
}

/// F1 of classifying precomputed statistics against `tau`.
pub fn f1_at(stats: &[(f64, LabelValue)], tau: f64) -> f64 {
    let mut c = ConfusionCounts::default();
    for &(s, t) in stats {
        match (s > tau, t.is_anomalous()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    c.scores().f1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub n_runs: usize,
}

/// Mean and sample standard deviation (`n - 1` divisor; 0 for a single value).
pub fn aggregate(values: &[f64]) -> Result<MetricSummary, EvalError> {
    if values.is_empty() {
        return Err(EvalError::EmptyAggregate);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(MetricSummary {
        mean,
        std,
        n_runs: n,
    })
}
