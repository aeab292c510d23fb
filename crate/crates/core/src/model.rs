//! Shared domain types for discrete-sequence active learning.
//!
//! A dataset is a collection of independent multivariate [`Sequence`]s. A detector turns
//! each one into a univariate [`AnomalyScore`] of the same length. Query strategies move
//! entries from the candidate pool of a [`QueryState`] into its labelled query set.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("empty anomaly score")]
    EmptyScore,
    #[error("anomaly score for `{0}` contains a non-finite value")]
    NonFiniteScore(String),
    #[error("candidate index {index} out of range for pool of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid sequence `{id}`: {reason}")]
    InvalidSequence { id: String, reason: String },
    #[error("score `{score_id}` does not belong to sequence `{sequence_id}`")]
    ScoreMismatch {
        score_id: String,
        sequence_id: String,
    },
    #[error("score length {score_len} does not match sequence `{id}` with {steps} steps")]
    LengthMismatch {
        id: String,
        score_len: usize,
        steps: usize,
    },
    #[error("duplicate sequence id `{0}`")]
    DuplicateId(String),
}

/// Binary class of a sequence. Anomalous is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelValue {
    Nominal,
    Anomalous,
}

impl LabelValue {
    pub fn flipped(self) -> Self {
        match self {
            LabelValue::Nominal => LabelValue::Anomalous,
            LabelValue::Anomalous => LabelValue::Nominal,
        }
    }

    pub fn is_anomalous(self) -> bool {
        self == LabelValue::Anomalous
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LabelValue::Nominal => "nominal",
            LabelValue::Anomalous => "anomalous",
        }
    }
}

impl fmt::Display for LabelValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LabelValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nominal" | "n" => Ok(LabelValue::Nominal),
            "anomalous" | "a" => Ok(LabelValue::Anomalous),
            other => Err(format!("unknown label `{other}`, expected nominal or anomalous")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    GroundTruth,
    SimulatedOracle,
    HumanOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub value: LabelValue,
    pub source: LabelSource,
}

impl Label {
    pub fn new(value: LabelValue, source: LabelSource) -> Self {
        Self { value, source }
    }

    pub fn ground_truth(value: LabelValue) -> Self {
        Self::new(value, LabelSource::GroundTruth)
    }
}

/// One recorded multivariate time series.
///
/// `channels` is stored time-major: `channels[t][c]` is channel `c` at step `t`. This is
/// also the on-disk layout of the line-delimited dataset format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub id: String,
    pub duration_s: f64,
    pub channels: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<LabelValue>,
}

impl Sequence {
    pub fn steps(&self) -> usize {
        self.channels.len()
    }

    pub fn dims(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    /// Checks the per-sequence invariants: at least one step, a consistent nonzero channel
    /// count, finite values and a positive duration.
    pub fn validate(&self) -> Result<(), ModelError> {
        let invalid = |reason: &str| ModelError::InvalidSequence {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.channels.is_empty() {
            return Err(invalid("no time steps"));
        }
        let dims = self.dims();
        if dims == 0 {
            return Err(invalid("no channels"));
        }
        if self.channels.iter().any(|row| row.len() != dims) {
            return Err(invalid("ragged channel rows"));
        }
        if self.channels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite value"));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(invalid("duration must be positive"));
        }
        Ok(())
    }

    /// Values of a single channel as a contiguous vector.
    pub fn channel(&self, c: usize) -> Vec<f64> {
        self.channels.iter().map(|row| row[c]).collect()
    }
}

impl AsRef<Sequence> for Sequence {
    fn as_ref(&self) -> &Sequence {
        self
    }
}

/// Univariate anomaly score aligned step-by-step with a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyScore {
    pub sequence_id: String,
    pub values: Vec<f64>,
}

impl AnomalyScore {
    pub fn new(sequence_id: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            sequence_id: sequence_id.into(),
            values,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.values.is_empty() {
            return Err(ModelError::EmptyScore);
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteScore(self.sequence_id.clone()));
        }
        Ok(())
    }

    /// Checks that this score belongs to `seq` and matches its length.
    pub fn validate_against(&self, seq: &Sequence) -> Result<(), ModelError> {
        if self.sequence_id != seq.id {
            return Err(ModelError::ScoreMismatch {
                score_id: self.sequence_id.clone(),
                sequence_id: seq.id.clone(),
            });
        }
        if self.values.len() != seq.steps() {
            return Err(ModelError::LengthMismatch {
                id: seq.id.clone(),
                score_len: self.values.len(),
                steps: seq.steps(),
            });
        }
        self.validate()
    }

    pub fn statistic(&self) -> Result<f64, ModelError> {
        sequence_statistic(self)
    }
}

/// The per-sequence scalar every strategy and threshold works with: the peak score.
///
/// Classifying a sequence as anomalous when any step exceeds a threshold is the same as
/// comparing this maximum against the threshold.
pub fn sequence_statistic(score: &AnomalyScore) -> Result<f64, ModelError> {
    score
        .values
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or(ModelError::EmptyScore)
}

/// An unlabelled entry of the candidate pool.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub sequence: Arc<Sequence>,
    pub score: AnomalyScore,
}

impl Candidate {
    pub fn new(sequence: Arc<Sequence>, score: AnomalyScore) -> Self {
        Self { sequence, score }
    }

    pub fn id(&self) -> &str {
        &self.sequence.id
    }
}

/// A labelled entry of the query set.
#[derive(Debug, Clone, PartialEq)]
pub struct Queried {
    pub sequence: Arc<Sequence>,
    pub score: AnomalyScore,
    pub label: Label,
}

impl Queried {
    pub fn id(&self) -> &str {
        &self.sequence.id
    }
}

/// Candidate pool and query set, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QueryState {
    candidates: Vec<Candidate>,
    queried: Vec<Queried>,
    round: usize,
}

impl QueryState {
    pub fn new(candidates: Vec<Candidate>) -> Result<Self, ModelError> {
        Self::with_queried(candidates, Vec::new(), 0)
    }

    /// Builds a state from an existing pool and query set, checking that ids are unique
    /// across both.
    pub fn with_queried(
        candidates: Vec<Candidate>,
        queried: Vec<Queried>,
        round: usize,
    ) -> Result<Self, ModelError> {
        let mut seen = HashSet::new();
        let ids = candidates
            .iter()
            .map(Candidate::id)
            .chain(queried.iter().map(Queried::id));
        for id in ids {
            if !seen.insert(id) {
                return Err(ModelError::DuplicateId(id.to_string()));
            }
        }
        for c in &candidates {
            c.score.validate_against(&c.sequence)?;
        }
        for q in &queried {
            q.score.validate_against(&q.sequence)?;
        }
        Ok(Self {
            candidates,
            queried,
            round,
        })
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn queried(&self) -> &[Queried] {
        &self.queried
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn advance_round(&mut self) {
        self.round += 1;
    }

    pub fn candidate_index(&self, id: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c.id() == id)
    }

    /// Moves candidate `index` to the end of the query set with `label`.
    pub fn move_to_query_set(&mut self, index: usize, label: Label) -> Result<(), ModelError> {
        if index >= self.candidates.len() {
            return Err(ModelError::IndexOutOfRange {
                index,
                len: self.candidates.len(),
            });
        }
        let Candidate { sequence, score } = self.candidates.remove(index);
        self.queried.push(Queried {
            sequence,
            score,
            label,
        });
        Ok(())
    }

    /// Labelled pairs of the query set, as consumed by threshold fitting.
    pub fn labelled(&self) -> Vec<(AnomalyScore, Label)> {
        self.queried
            .iter()
            .map(|q| (q.score.clone(), q.label))
            .collect()
    }
}
