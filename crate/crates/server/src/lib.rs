//! Labelling service for a human oracle: serves each round's queries with their series
//! and scores, records labels in an append-only event log and refits the threshold when
//! a round is complete.

pub mod api;
pub mod session;
pub mod store;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dqs_core::synthetic::{load_scores, read_sequences, SyntheticError};
use dqs_core::Candidate;
use thiserror::Error;

pub use api::{router, AppState};
pub use session::{Event, QueryPayload, Session, SessionError, SessionReport, Summary};
pub use store::EventLog;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Data(#[from] SyntheticError),
    #[error("sequence `{0}` has no score")]
    MissingScore(String),
    #[error("{path}: {source}")]
    Log {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("replaying {path}: {source}")]
    Replay {
        path: PathBuf,
        #[source]
        source: SessionError,
    },
    #[error(transparent)]
    Session(#[from] SessionError),
}

/// Pairs every sequence in `sequences` with its score from `scores`.
pub fn load_pool(sequences: &Path, scores: &Path) -> Result<Vec<Candidate>, ServerError> {
    let seqs: Vec<Arc<_>> = read_sequences(sequences)?.into_iter().map(Arc::new).collect();
    let mut by_id: HashMap<String, _> = load_scores(scores, &seqs)?
        .scores
        .into_iter()
        .map(|s| (s.sequence_id.clone(), s))
        .collect();
    seqs.into_iter()
        .map(|s| {
            let score = by_id
                .remove(&s.id)
                .ok_or_else(|| ServerError::MissingScore(s.id.clone()))?;
            Ok(Candidate::new(s, score))
        })
        .collect()
}

/// A session bound to its event log. Every mutation is logged before it is applied.
#[derive(Debug)]
pub struct Service {
    session: Session,
    log: EventLog,
}

impl Service {
    /// Opens the log at `log_path`, replaying any events it already holds.
    pub fn open(
        id: &str,
        seed: u64,
        pool: Vec<Candidate>,
        log_path: &Path,
    ) -> Result<Self, ServerError> {
        let (log, events) = EventLog::open(log_path)?;
        let session = Session::replay(id, seed, pool, &events).map_err(|source| ServerError::Replay {
            path: log_path.to_path_buf(),
            source,
        })?;
        if !events.is_empty() {
            log::info!(
                "session `{id}`: replayed {} events, round {}",
                events.len(),
                session.round()
            );
        }
        Ok(Self { session, log })
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    fn commit(&mut self, event: Event) -> Result<(), SessionError> {
        self.log
            .append(&event)
            .map_err(|e| SessionError::Internal(e.to_string()))?;
        self.session.apply(&event)
    }

    pub fn start_round(
        &mut self,
        strategy: dqs_core::StrategyKind,
        budget: usize,
    ) -> Result<Vec<String>, SessionError> {
        let e = self.session.plan_round(strategy, budget, session::now_ms())?;
        self.commit(e)?;
        Ok(self.session.pending().to_vec())
    }

    pub fn submit_label(
        &mut self,
        id: &str,
        value: dqs_core::LabelValue,
    ) -> Result<Summary, SessionError> {
        let e = self.session.plan_label(id, value, session::now_ms())?;
        self.commit(e)?;
        Ok(self.session.summary())
    }
}
