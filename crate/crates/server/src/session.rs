//! Labelling session state machine.
//!
//! Every mutation is first planned as an [`Event`] against the current state and only
//! then applied, so the event log can be written before the state changes and replayed
//! through the same code path on restart.

use std::collections::HashMap;
use std::time::{SystemTime, UNIX_EPOCH};

use dqs_core::evaluation::{f1_at, prf1};
use dqs_core::strategies::select;
use dqs_core::thresholding::{fit_threshold, unsupervised_threshold};
use dqs_core::{
    sequence_statistic, Candidate, Label, LabelSource, LabelValue, QueryState, RoundRequest,
    SeededRng, StrategyKind, Threshold,
};
use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SessionError {
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Internal(String),
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::NotFound(_) => "not_found",
            SessionError::Conflict(_) => "conflict",
            SessionError::BadRequest(_) => "bad_request",
            SessionError::Internal(_) => "internal",
        }
    }
}

fn internal(e: impl std::fmt::Display) -> SessionError {
    SessionError::Internal(e.to_string())
}

/// One line of the session's event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Round {
        round: usize,
        strategy: StrategyKind,
        budget: usize,
        selected: Vec<String>,
        at_ms: u64,
    },
    Label {
        round: usize,
        sequence_id: String,
        value: LabelValue,
        at_ms: u64,
    },
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub id: String,
    pub round: usize,
    pub pending: Vec<String>,
    pub pool: usize,
    pub labels: usize,
    pub tau_us: f64,
    pub tau: Option<f64>,
    pub f1_on_queries: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPayload {
    pub id: String,
    pub round: usize,
    /// Time-major samples, one inner vector per step.
    pub channels: Vec<Vec<f64>>,
    pub score: Vec<f64>,
    pub statistic: f64,
    pub tau_us: f64,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub tau: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Thresholds and their metrics on the labelled query set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub id: String,
    pub rounds: usize,
    pub labels: usize,
    pub anomalous: usize,
    pub nominal: usize,
    pub unsupervised: ThresholdMetrics,
    pub fitted: Option<ThresholdMetrics>,
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    seed: u64,
    state: QueryState,
    pending: Vec<String>,
    fitted: Option<Threshold>,
    tau_us: f64,
    audit: Vec<Event>,
    statistics: HashMap<String, f64>,
}

impl Session {
    /// A fresh session over `pool`; τ_us is the largest score in the pool.
    pub fn new(id: impl Into<String>, seed: u64, pool: Vec<Candidate>) -> Result<Self, SessionError> {
        let scores: Vec<_> = pool.iter().map(|c| c.score.clone()).collect();
        let tau_us = if scores.is_empty() {
            warn!("session started with an empty candidate pool");
            0.0
        } else {
            unsupervised_threshold(&scores).map_err(internal)?.value
        };
        let statistics = pool
            .iter()
            .map(|c| Ok((c.id().to_string(), sequence_statistic(&c.score)?)))
            .collect::<Result<_, dqs_core::model::ModelError>>()
            .map_err(internal)?;
        Ok(Self {
            id: id.into(),
            seed,
            state: QueryState::new(pool).map_err(internal)?,
            pending: Vec::new(),
            fitted: None,
            tau_us,
            audit: Vec::new(),
            statistics,
        })
    }

    /// Rebuilds a session by applying logged events in order.
    pub fn replay(
        id: impl Into<String>,
        seed: u64,
        pool: Vec<Candidate>,
        events: &[Event],
    ) -> Result<Self, SessionError> {
        let mut s = Self::new(id, seed, pool)?;
        for e in events {
            s.apply(e)?;
        }
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn round(&self) -> usize {
        self.state.round()
    }

    pub fn pending(&self) -> &[String] {
        &self.pending
    }

    pub fn fitted(&self) -> Option<&Threshold> {
        self.fitted.as_ref()
    }

    pub fn query_state(&self) -> &QueryState {
        &self.state
    }

    /// Accepted label events, in order.
    pub fn audit(&self) -> impl Iterator<Item = &Event> {
        self.audit.iter().filter(|e| matches!(e, Event::Label { .. }))
    }

    pub fn plan_round(
        &self,
        strategy: StrategyKind,
        budget: usize,
        at_ms: u64,
    ) -> Result<Event, SessionError> {
        if !self.pending.is_empty() {
            return Err(SessionError::Conflict(format!(
                "{} labels still pending in round {}",
                self.pending.len(),
                self.round()
            )));
        }
        if budget == 0 {
            return Err(SessionError::BadRequest("budget must be at least 1".into()));
        }
        let round = self.round() + 1;
        let selected = if self.state.candidates().is_empty() {
            warn!("round {round}: candidate pool is empty");
            Vec::new()
        } else {
            let mut req = RoundRequest::new(strategy, budget);
            if let Some(t) = &self.fitted {
                req = req.with_threshold(t.value);
            }
            let mut rng = SeededRng::derive(self.seed, &[round as u64], "round");
            select(&self.state, &req, &mut rng).map_err(internal)?.ids
        };
        Ok(Event::Round {
            round,
            strategy,
            budget,
            selected,
            at_ms,
        })
    }

    pub fn plan_label(&self, id: &str, value: LabelValue, at_ms: u64) -> Result<Event, SessionError> {
        if self.state.queried().iter().any(|q| q.id() == id) {
            return Err(SessionError::Conflict(format!("`{id}` is already labelled")));
        }
        if !self.pending.iter().any(|p| p == id) {
            return Err(SessionError::NotFound(format!("`{id}` is not a pending query")));
        }
        Ok(Event::Label {
            round: self.round(),
            sequence_id: id.to_string(),
            value,
            at_ms,
        })
    }

    /// Applies a planned or replayed event.
    pub fn apply(&mut self, event: &Event) -> Result<(), SessionError> {
        match event {
            Event::Round { round, selected, .. } => {
                if !self.pending.is_empty() || *round != self.round() + 1 {
                    return Err(SessionError::Conflict(format!(
                        "round {round} cannot start after round {}",
                        self.round()
                    )));
                }
                if let Some(id) = selected.iter().find(|id| self.state.candidate_index(id).is_none()) {
                    return Err(SessionError::NotFound(format!("`{id}` is not a candidate")));
                }
                self.state.advance_round();
                self.pending = selected.clone();
            }
            Event::Label {
                round,
                sequence_id,
                value,
                ..
            } => {
                if *round != self.round() {
                    return Err(SessionError::Conflict(format!(
                        "label for round {round} during round {}",
                        self.round()
                    )));
                }
                let slot = self
                    .pending
                    .iter()
                    .position(|p| p == sequence_id)
                    .ok_or_else(|| SessionError::NotFound(format!("`{sequence_id}` is not pending")))?;
                let index = self
                    .state
                    .candidate_index(sequence_id)
                    .ok_or_else(|| internal(format!("pending `{sequence_id}` left the pool")))?;
                self.state
                    .move_to_query_set(index, Label::new(*value, LabelSource::HumanOracle))
                    .map_err(internal)?;
                self.pending.remove(slot);
                if self.pending.is_empty() {
                    self.fitted = Some(fit_threshold(&self.state.labelled()).map_err(internal)?);
                }
            }
        }
        self.audit.push(event.clone());
        Ok(())
    }

    pub fn start_round(&mut self, strategy: StrategyKind, budget: usize) -> Result<Vec<String>, SessionError> {
        let e = self.plan_round(strategy, budget, now_ms())?;
        self.apply(&e)?;
        Ok(self.pending.clone())
    }

    pub fn submit_label(&mut self, id: &str, value: LabelValue) -> Result<Summary, SessionError> {
        let e = self.plan_label(id, value, now_ms())?;
        self.apply(&e)?;
        Ok(self.summary())
    }

    pub fn get_query(&self, id: &str) -> Result<QueryPayload, SessionError> {
        let not_found = || SessionError::NotFound(format!("`{id}` is not a pending query"));
        if !self.pending.iter().any(|p| p == id) {
            return Err(not_found());
        }
        let c = &self.state.candidates()[self.state.candidate_index(id).ok_or_else(not_found)?];
        Ok(QueryPayload {
            id: id.to_string(),
            round: self.round(),
            channels: c.sequence.channels.clone(),
            score: c.score.values.clone(),
            statistic: self.statistics[id],
            tau_us: self.tau_us,
            tau: self.fitted.as_ref().map(|t| t.value),
        })
    }

    fn query_statistics(&self) -> Vec<(f64, LabelValue)> {
        self.state
            .queried()
            .iter()
            .map(|q| (self.statistics[q.id()], q.label.value))
            .collect()
    }

    pub fn summary(&self) -> Summary {
        let stats = self.query_statistics();
        Summary {
            id: self.id.clone(),
            round: self.round(),
            pending: self.pending.clone(),
            pool: self.state.candidates().len(),
            labels: stats.len(),
            tau_us: self.tau_us,
            tau: self.fitted.as_ref().map(|t| t.value),
            f1_on_queries: self.fitted.as_ref().map(|t| f1_at(&stats, t.value)),
        }
    }

    pub fn report(&self) -> SessionReport {
        let stats = self.query_statistics();
        let metrics = |tau: f64| {
            let pred: Vec<_> = stats
                .iter()
                .map(|&(s, _)| dqs_core::evaluation::classify_statistic(s, tau))
                .collect();
            let truth: Vec<_> = stats.iter().map(|&(_, v)| v).collect();
            let p = prf1(&pred, &truth).expect("equal lengths");
            ThresholdMetrics {
                tau,
                precision: p.precision,
                recall: p.recall,
                f1: p.f1,
            }
        };
        let anomalous = stats.iter().filter(|(_, v)| v.is_anomalous()).count();
        SessionReport {
            id: self.id.clone(),
            rounds: self.round(),
            labels: stats.len(),
            anomalous,
            nominal: stats.len() - anomalous,
            unsupervised: metrics(self.tau_us),
            fitted: self.fitted.as_ref().map(|t| metrics(t.value)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dqs_core::{AnomalyScore, Sequence};
    use std::sync::Arc;

    fn pool(stats: &[f64]) -> Vec<Candidate> {
        stats
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let id = format!("q{i}");
                let seq = Sequence {
                    id: id.clone(),
                    duration_s: 1.0,
                    channels: vec![vec![0.0, 1.0]; 3],
                    truth: None,
                };
                Candidate::new(Arc::new(seq), AnomalyScore::new(id, vec![0.0, s, 0.0]))
            })
            .collect()
    }

    #[test]
    fn round_then_labels_refits() {
        let mut s = Session::new("s", 1, pool(&[0.1, 0.9, 0.5, 0.7, 0.2, 0.3])).unwrap();
        assert_eq!(s.summary().tau_us, 0.9);
        let ids = s.start_round(StrategyKind::Tqs, 3).unwrap();
        assert_eq!(ids, ["q1", "q3", "q2"]);
        let err = s.start_round(StrategyKind::Tqs, 3).unwrap_err();
        assert_eq!(err.code(), "conflict");

        let sum = s.submit_label("q1", LabelValue::Anomalous).unwrap();
        assert_eq!(sum.tau, None);
        s.submit_label("q3", LabelValue::Anomalous).unwrap();
        let sum = s.submit_label("q2", LabelValue::Nominal).unwrap();
        assert!(sum.pending.is_empty());
        assert_eq!(sum.tau, Some(0.6));
        assert_eq!(sum.f1_on_queries, Some(1.0));
        assert_eq!(s.audit().count(), 3);
    }

    #[test]
    fn query_and_label_errors() {
        let mut s = Session::new("s", 1, pool(&[0.1, 0.9, 0.5])).unwrap();
        s.start_round(StrategyKind::Tqs, 1).unwrap();
        let q = s.get_query("q1").unwrap();
        assert_eq!(q.channels.len(), 3);
        assert_eq!(q.statistic, 0.9);
        assert_eq!(s.get_query("q0").unwrap_err().code(), "not_found");
        assert_eq!(s.get_query("../etc").unwrap_err().code(), "not_found");
        assert_eq!(s.submit_label("q0", LabelValue::Nominal).unwrap_err().code(), "not_found");
        s.submit_label("q1", LabelValue::Anomalous).unwrap();
        assert_eq!(s.get_query("q1").unwrap_err().code(), "not_found");
        assert_eq!(s.submit_label("q1", LabelValue::Nominal).unwrap_err().code(), "conflict");
    }

    #[test]
    fn empty_pool_round_is_empty() {
        let mut s = Session::new("s", 1, pool(&[0.4])).unwrap();
        s.start_round(StrategyKind::Rqs, 5).unwrap();
        s.submit_label("q0", LabelValue::Nominal).unwrap();
        assert!(s.start_round(StrategyKind::Dqs, 2).unwrap().is_empty());
        assert_eq!(s.round(), 2);
        assert!(s.start_round(StrategyKind::Uqs, 2).unwrap().is_empty());
        assert_eq!(s.start_round(StrategyKind::Rqs, 0).unwrap_err().code(), "bad_request");
    }

    #[test]
    fn replay_reconstructs_state() {
        let mut s = Session::new("s", 9, pool(&[0.1, 0.9, 0.5, 0.7, 0.2, 0.3, 0.6])).unwrap();
        for (strategy, b) in [(StrategyKind::Dqs, 2), (StrategyKind::Uqs, 2), (StrategyKind::Rqs, 2)] {
            for id in s.start_round(strategy, b).unwrap() {
                let v = if s.statistics[&id] > 0.55 {
                    LabelValue::Anomalous
                } else {
                    LabelValue::Nominal
                };
                s.submit_label(&id, v).unwrap();
            }
        }
        s.start_round(StrategyKind::Tqs, 1).unwrap();
        let events: Vec<Event> = s.audit.clone();
        let r = Session::replay("s", 9, pool(&[0.1, 0.9, 0.5, 0.7, 0.2, 0.3, 0.6]), &events).unwrap();
        assert_eq!(r.summary(), s.summary());
        assert_eq!(r.query_state(), s.query_state());
        assert_eq!(r.fitted(), s.fitted());
        assert_eq!(r.audit().count(), 6);
    }

    #[test]
    fn replay_rejects_out_of_order_events() {
        let s = Session::new("s", 1, pool(&[0.1, 0.2])).unwrap();
        let label = Event::Label {
            round: 0,
            sequence_id: "q0".into(),
            value: LabelValue::Nominal,
            at_ms: 0,
        };
        assert!(Session::replay("s", 1, pool(&[0.1, 0.2]), &[label]).is_err());
        let round = s.plan_round(StrategyKind::Tqs, 1, 0).unwrap();
        let err = Session::replay("s", 1, pool(&[0.1, 0.2]), &[round.clone(), round]).unwrap_err();
        assert_eq!(err.code(), "conflict");
    }
}
