//! Query strategies: which candidates go to the oracle in a round.
//!
//! All four strategies share the same loop: pick one candidate, remove it from the working
//! pool, repeat `B` times. Picks are made on a working copy, so a [`Selection`] is a pure
//! function of the state, the request and the random stream; [`commit`] then moves the
//! selected candidates into the query set once labels are available.
//!
//! Ties in every argmax/argmin resolve to the earliest-inserted candidate.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtw::{dtw_distance, DtwError};
use crate::model::{sequence_statistic, Candidate, Label, ModelError, QueryState};
use crate::rng::SeededRng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("query budget must be at least 1")]
    InvalidBudget,
    #[error("UQS requires current threshold")]
    MissingThreshold,
    #[error("cannot initialise UQS threshold from an empty candidate pool")]
    EmptyPool,
    #[error("selected id `{0}` is not in the candidate pool")]
    UnknownId(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dtw(#[from] DtwError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    /// Uniform random draws.
    #[serde(rename = "RQS")]
    Rqs,
    /// Highest sequence statistic first.
    #[serde(rename = "TQS")]
    Tqs,
    /// Closest to the current threshold first.
    #[serde(rename = "UQS")]
    Uqs,
    /// Most dissimilar (DTW) to the candidate closest to the query set.
    #[serde(rename = "DQS")]
    Dqs,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [Self::Rqs, Self::Tqs, Self::Uqs, Self::Dqs];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rqs => "RQS",
            Self::Tqs => "TQS",
            Self::Uqs => "UQS",
            Self::Dqs => "DQS",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "RQS" => Ok(Self::Rqs),
            "TQS" => Ok(Self::Tqs),
            "UQS" => Ok(Self::Uqs),
            "DQS" => Ok(Self::Dqs),
            other => Err(format!("unknown strategy `{other}`, expected RQS, TQS, UQS or DQS")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRequest {
    pub budget: usize,
    pub strategy: StrategyKind,
    /// Threshold UQS centres on. Ignored by the other strategies.
    pub threshold_hint: Option<f64>,
}

impl RoundRequest {
    pub fn new(strategy: StrategyKind, budget: usize) -> Self {
        Self {
            budget,
            strategy,
            threshold_hint: None,
        }
    }

    pub fn with_threshold(mut self, tau: f64) -> Self {
        self.threshold_hint = Some(tau);
        self
    }
}

/// Ordered outcome of one round.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Selected sequence ids, in selection order.
    pub ids: Vec<String>,
    /// Set when the budget exceeded the pool and fewer than `B` ids were selected.
    pub clamped: bool,
}

impl Selection {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Runs the strategy named in `req`.
pub fn select(
    state: &QueryState,
    req: &RoundRequest,
    rng: &mut SeededRng,
) -> Result<Selection, StrategyError> {
    match req.strategy {
        StrategyKind::Rqs => rqs_round(state, req, rng),
        StrategyKind::Tqs => tqs_round(state, req),
        StrategyKind::Uqs => uqs_round(state, req),
        StrategyKind::Dqs => dqs_round(state, req, rng),
    }
}

/// Number of picks for this round and whether the budget had to be clamped.
fn effective_budget(state: &QueryState, req: &RoundRequest) -> Result<(usize, bool), StrategyError> {
    if req.budget == 0 {
        return Err(StrategyError::InvalidBudget);
    }
    let pool = state.candidates().len();
    if req.budget > pool {
        warn!(
            "{}: budget {} exceeds candidate pool of {pool}; clamping",
            req.strategy, req.budget
        );
        Ok((pool, true))
    } else {
        Ok((req.budget, false))
    }
}

/// Iteratively picks from a shrinking pool of candidate positions.
fn pick_iteratively(
    state: &QueryState,
    take: usize,
    clamped: bool,
    mut pick: impl FnMut(&[usize]) -> usize,
) -> Selection {
    let mut pool: Vec<usize> = (0..state.candidates().len()).collect();
    let mut ids = Vec::with_capacity(take);
    for _ in 0..take {
        let slot = pick(&pool);
        let idx = pool.remove(slot);
        ids.push(state.candidates()[idx].id().to_string());
    }
    Selection { ids, clamped }
}

/// Position of the first maximum of `key` over `pool`.
fn first_argmax(pool: &[usize], key: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (slot, &idx) in pool.iter().enumerate() {
        let v = key(idx);
        if v > best_val {
            best = slot;
            best_val = v;
        }
    }
    best
}

fn statistics(state: &QueryState) -> Result<Vec<f64>, StrategyError> {
    state
        .candidates()
        .iter()
        .map(|c| sequence_statistic(&c.score).map_err(StrategyError::from))
        .collect()
}

/// Random-based strategy: uniform draws without replacement.
pub fn rqs_round(
    state: &QueryState,
    req: &RoundRequest,
    rng: &mut SeededRng,
) -> Result<Selection, StrategyError> {
    let (take, clamped) = effective_budget(state, req)?;
    Ok(pick_iteratively(state, take, clamped, |pool| {
        rng.index(pool.len())
    }))
}

/// Top-based strategy: repeatedly the largest sequence statistic.
pub fn tqs_round(state: &QueryState, req: &RoundRequest) -> Result<Selection, StrategyError> {
    let (take, clamped) = effective_budget(state, req)?;
    let stats = statistics(state)?;
    Ok(pick_iteratively(state, take, clamped, |pool| {
        first_argmax(pool, |i| stats[i])
    }))
}

/// Initial UQS threshold: the mean over candidates of each score's time-average.
pub fn uqs_init_threshold(state: &QueryState) -> Result<f64, StrategyError> {
    let candidates = state.candidates();
    if candidates.is_empty() {
        return Err(StrategyError::EmptyPool);
    }
    let mut total = 0.0;
    for c in candidates {
        c.score.validate()?;
        total += c.score.values.iter().sum::<f64>() / c.score.values.len() as f64;
    }
    Ok(total / candidates.len() as f64)
}

/// Uncertainty-based strategy: repeatedly the statistic nearest to the threshold.
///
/// Uses `req.threshold_hint` when given. Without a hint the threshold is initialised by
/// [`uqs_init_threshold`], which is only allowed before anything has been queried.
pub fn uqs_round(state: &QueryState, req: &RoundRequest) -> Result<Selection, StrategyError> {
    let (take, clamped) = effective_budget(state, req)?;
    if take == 0 {
        return Ok(Selection { ids: vec![], clamped });
    }
    let tau = match req.threshold_hint {
        Some(t) => t,
        None if state.queried().is_empty() => uqs_init_threshold(state)?,
        None => return Err(StrategyError::MissingThreshold),
    };
    let stats = statistics(state)?;
    Ok(pick_iteratively(state, take, clamped, |pool| {
        first_argmax(pool, |i| -(stats[i] - tau).abs())
    }))
}

/// Memoized pairwise DTW between query-set entries and candidates.
///
/// Entries are keyed by a unified index: queried entry `m` is `m`, candidate `n` is
/// `n_queried + n`. DTW is exactly symmetric, so pairs are stored unordered.
struct DistanceCache<'a> {
    series: Vec<&'a [f64]>,
    known: HashMap<(usize, usize), f64>,
}

impl<'a> DistanceCache<'a> {
    fn new(state: &'a QueryState) -> Self {
        let series = state
            .queried()
            .iter()
            .map(|q| q.score.values.as_slice())
            .chain(state.candidates().iter().map(|c| c.score.values.as_slice()))
            .collect();
        Self {
            series,
            known: HashMap::new(),
        }
    }

    fn key(a: usize, b: usize) -> (usize, usize) {
        (a.min(b), a.max(b))
    }

    /// Computes every missing pair in parallel.
    fn fill(&mut self, pairs: impl Iterator<Item = (usize, usize)>) -> Result<(), DtwError> {
        let mut missing: Vec<(usize, usize)> = pairs
            .map(|(a, b)| Self::key(a, b))
            .filter(|k| !self.known.contains_key(k))
            .collect();
        missing.sort_unstable();
        missing.dedup();
        let series = &self.series;
        let computed: Vec<((usize, usize), f64)> = missing
            .into_par_iter()
            .map(|(a, b)| {
                dtw_distance(series[a], series[b])
                    .map(|d| ((a, b), d))
                    .map_err(|e| DtwError::Pair {
                        row: a,
                        col: b,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<_, _>>()?;
        self.known.extend(computed);
        Ok(())
    }

    fn get(&self, a: usize, b: usize) -> f64 {
        self.known[&Self::key(a, b)]
    }
}

/// Dissimilarity-based strategy.
///
/// With an empty query set the pick is a uniform random candidate. Otherwise the
/// candidate `o` with the smallest DTW distance to any query-set score is located, and
/// the candidate farthest from `o` is picked. Each pick joins the query set for the
/// following picks of the same round.
pub fn dqs_round(
    state: &QueryState,
    req: &RoundRequest,
    rng: &mut SeededRng,
) -> Result<Selection, StrategyError> {
    let (take, clamped) = effective_budget(state, req)?;
    for c in state.candidates() {
        c.score.validate()?;
    }
    let offset = state.queried().len();
    let mut cache = DistanceCache::new(state);
    // Unified indices of the query set, growing as candidates are picked.
    let mut query: Vec<usize> = (0..offset).collect();
    let mut pool: Vec<usize> = (0..state.candidates().len()).collect();
    let mut ids = Vec::with_capacity(take);

    for _ in 0..take {
        let slot = if query.is_empty() {
            rng.index(pool.len())
        } else {
            cache.fill(
                pool.iter()
                    .flat_map(|&n| query.iter().map(move |&q| (offset + n, q))),
            )?;
            let mut o = 0;
            let mut best = f64::INFINITY;
            for (slot, &n) in pool.iter().enumerate() {
                for &q in &query {
                    let d = cache.get(offset + n, q);
                    if d < best {
                        best = d;
                        o = slot;
                    }
                }
            }
            let anchor = offset + pool[o];
            cache.fill(pool.iter().map(|&n| (offset + n, anchor)))?;
            first_argmax(&pool, |n| cache.get(offset + n, anchor))
        };
        let n = pool.remove(slot);
        query.push(offset + n);
        ids.push(state.candidates()[n].id().to_string());
    }
    Ok(Selection { ids, clamped })
}

/// Moves every selected candidate into the query set, labelling each through `label`.
///
/// Labels are requested in selection order.
pub fn commit<E>(
    state: &mut QueryState,
    selection: &Selection,
    mut label: impl FnMut(&Candidate) -> Result<Label, E>,
) -> Result<(), E>
where
    E: From<StrategyError>,
{
    for id in &selection.ids {
        let index = state
            .candidate_index(id)
            .ok_or_else(|| StrategyError::UnknownId(id.clone()))?;
        let l = label(&state.candidates()[index])?;
        state
            .move_to_query_set(index, l)
            .map_err(StrategyError::from)?;
    }
    Ok(())
}
