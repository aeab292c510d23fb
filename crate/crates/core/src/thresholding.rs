//! Decision thresholds: unsupervised, fitted from oracle labels, and test-set best.
//!
//! Sequence-level F1 only changes where the threshold crosses an observed sequence
//! statistic, so the grid of midpoints between sorted unique statistics plus one sentinel
//! on each side reaches every achievable confusion matrix. Among thresholds with the
//! maximum F1 the largest is kept.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::f1_at;
use crate::model::{sequence_statistic, AnomalyScore, Label, LabelValue, ModelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("no scores to derive a threshold from")]
    Empty,
    #[error("statistic {0} is not finite")]
    NonFinite(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Unsupervised,
    Fitted,
    Best,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub provenance: Provenance,
    /// Number of oracle labels behind a fitted threshold; 0 otherwise.
    pub fitted_on: usize,
}

/// Maximum score over every step of every validation score.
pub fn unsupervised_threshold(validation: &[AnomalyScore]) -> Result<Threshold, ThresholdError> {
    let mut max = None::<f64>;
    for score in validation {
        let s = sequence_statistic(score)?;
        max = Some(max.map_or(s, |m| m.max(s)));
    }
    let value = max.ok_or(ThresholdError::Empty)?;
    Ok(Threshold {
        value,
        provenance: Provenance::Unsupervised,
        fitted_on: 0,
    })
}

/// Candidate thresholds for a labelled statistic set, ascending.
pub fn candidate_grid(stats: &[(f64, LabelValue)]) -> Result<Vec<f64>, ThresholdError> {
    if let Some(&(bad, _)) = stats.iter().find(|(s, _)| !s.is_finite()) {
        return Err(ThresholdError::NonFinite(bad));
    }
    let mut unique: Vec<f64> = stats.iter().map(|&(s, _)| s).collect();
    unique.sort_by(f64::total_cmp);
    unique.dedup();
    let (first, last) = match (unique.first(), unique.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(ThresholdError::Empty),
    };
    let mut grid = Vec::with_capacity(unique.len() + 1);
    grid.push(first - 1.0);
    grid.extend(unique.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    grid.push(last + 1.0);
    Ok(grid)
}

/// Grid search for the F1-maximizing threshold, largest among ties.
fn grid_search(stats: &[(f64, LabelValue)]) -> Result<(f64, f64), ThresholdError> {
    let grid = candidate_grid(stats)?;
    let mut best = (grid[0], f64::NEG_INFINITY);
    for tau in grid {
        let f1 = f1_at(stats, tau);
        // Ascending grid: `>=` keeps the largest maximizer.
        if f1 >= best.1 {
            best = (tau, f1);
        }
    }
    Ok(best)
}

fn statistics(labelled: &[(AnomalyScore, Label)]) -> Result<Vec<(f64, LabelValue)>, ThresholdError> {
    labelled
        .iter()
        .map(|(score, label)| Ok((sequence_statistic(score)?, label.value)))
        .collect()
}

/// Threshold maximizing F1 against oracle labels.
pub fn fit_threshold(labelled: &[(AnomalyScore, Label)]) -> Result<Threshold, ThresholdError> {
    let (value, _) = grid_search(&statistics(labelled)?)?;
    Ok(Threshold {
        value,
        provenance: Provenance::Fitted,
        fitted_on: labelled.len(),
    })
}

/// Threshold maximizing F1 on a test set with true labels.
pub fn best_threshold(test: &[(AnomalyScore, Label)]) -> Result<Threshold, ThresholdError> {
    let (value, _) = grid_search(&statistics(test)?)?;
    Ok(Threshold {
        value,
        provenance: Provenance::Best,
        fitted_on: 0,
    })
}

/// Same search as [`fit_threshold`] on precomputed statistics; returns `(tau, f1)`.
pub fn fit_statistics(stats: &[(f64, LabelValue)]) -> Result<(f64, f64), ThresholdError> {
    grid_search(stats)
}
