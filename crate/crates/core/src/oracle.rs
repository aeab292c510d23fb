//! Label providers: a simulated oracle that mislabels with a fixed probability, and the
//! request records handed to a human oracle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Label, LabelSource, LabelValue};
use crate::rng::SeededRng;
use crate::strategies::Selection;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("mislabel probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("sequence `{0}` has no ground truth to label from")]
    MissingTruth(String),
    #[error("sequence `{0}` is not part of the current query selection")]
    NotSelected(String),
}

/// Mislabel probability of the simulated oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    mislabel_probability: f64,
}

impl OracleConfig {
    pub fn new(mislabel_probability: f64) -> Result<Self, OracleError> {
        if !(0.0..=1.0).contains(&mislabel_probability) {
            return Err(OracleError::InvalidProbability(mislabel_probability));
        }
        Ok(Self {
            mislabel_probability,
        })
    }

    pub fn mislabel_probability(&self) -> f64 {
        self.mislabel_probability
    }
}

/// Returns the truth, flipped with probability `p_m`. One Bernoulli draw per call.
pub fn simulated_label(truth: LabelValue, cfg: &OracleConfig, rng: &mut SeededRng) -> Label {
    let flip = rng.bernoulli(cfg.mislabel_probability);
    let value = if flip { truth.flipped() } else { truth };
    Label::new(value, LabelSource::SimulatedOracle)
}

/// Bundles the configuration and its dedicated random stream.
#[derive(Debug, Clone)]
pub struct SimulatedOracle {
    cfg: OracleConfig,
    rng: SeededRng,
}

impl SimulatedOracle {
    pub fn new(cfg: OracleConfig, rng: SeededRng) -> Self {
        Self { cfg, rng }
    }

    pub fn label(&mut self, id: &str, truth: Option<LabelValue>) -> Result<Label, OracleError> {
        let truth = truth.ok_or_else(|| OracleError::MissingTruth(id.to_string()))?;
        Ok(simulated_label(truth, &self.cfg, &mut self.rng))
    }
}

/// An outstanding request for a human label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRequest {
    pub sequence_id: String,
    pub round: usize,
}

/// Creates one pending request per id; every id must be part of `selection`.
pub fn request_labels(
    ids: &[String],
    selection: &Selection,
    round: usize,
) -> Result<Vec<LabelRequest>, OracleError> {
    ids.iter()
        .map(|id| {
            if selection.ids.contains(id) {
                Ok(LabelRequest {
                    sequence_id: id.clone(),
                    round,
                })
            } else {
                Err(OracleError::NotSelected(id.clone()))
            }
        })
        .collect()
}
