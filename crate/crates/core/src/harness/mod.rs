//! Benchmark protocol: cumulative day splits, one query round per round day, labels
//! carried forward, threshold refit after every round, and F1 on a fixed test subset
//! against the unsupervised and test-optimal baselines.
//!
//! Per fold and round day, the detector is refit on the training part of the day's split
//! and scores the validation part (the candidate pool) and the test subset. These scores
//! do not depend on strategy or seed and are computed once per fold. Queried entries keep
//! the score they had when they were queried.

mod chart;
mod config;
mod report;

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{default_round_days, DataSource, ExperimentConfig, ExternalSource};
pub use report::{
    emit_report, BaselineKind, BaselineRow, Cell, ExperimentReport, ReportProvenance, RunFailure,
};

use crate::evaluation::f1_at;
use crate::model::{sequence_statistic, AnomalyScore, Candidate, LabelValue, Queried, QueryState, Sequence};
use crate::oracle::{OracleConfig, SimulatedOracle};
use crate::rng::SeededRng;
use crate::strategies::{commit, select, RoundRequest, StrategyError, StrategyKind};
use crate::synthetic::{
    generate_dataset, load_scores, read_sequences, Dataset, ReferenceScorer, ScorerConfig,
    SyntheticError,
};
use crate::thresholding::{fit_statistics, fit_threshold, unsupervised_threshold, ThresholdError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("day {day}: split of {size} sequences cannot hold a training and a validation part")]
    SplitTooSmall { day: usize, size: usize },
    #[error("day {day}: no score for sequence `{id}`")]
    MissingScore { day: usize, id: String },
    #[error("sequence `{0}` has no ground truth")]
    MissingTruth(String),
    #[error("report has no result rows")]
    EmptyReport,
    #[error("{path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Synthetic(#[from] SyntheticError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    Oracle(#[from] crate::oracle::OracleError),
}

/// Detector output for one fold at one round day.
#[derive(Debug, Clone)]
pub struct DayScores {
    pub day: usize,
    /// Validation sequences with their scores, in recording order.
    pub validation: Vec<Candidate>,
    /// Test statistics with ground truth.
    pub test: Vec<(f64, LabelValue)>,
    pub tau_us: f64,
    pub f1_us: f64,
    pub tau_best: f64,
    pub f1_best: f64,
}

/// Number of sequences held out for validation from a split of `n`.
pub fn validation_size(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).round() as usize).clamp(1, n.saturating_sub(1).max(1))
}

fn truth_of(seq: &Sequence) -> Result<LabelValue, HarnessError> {
    seq.truth.ok_or_else(|| HarnessError::MissingTruth(seq.id.clone()))
}

fn finish_day(
    day: usize,
    validation: Vec<Candidate>,
    test_seqs: &[Arc<Sequence>],
    test_scores: &[AnomalyScore],
) -> Result<DayScores, HarnessError> {
    let val_scores: Vec<AnomalyScore> = validation.iter().map(|c| c.score.clone()).collect();
    let tau_us = unsupervised_threshold(&val_scores)?.value;
    let test = test_seqs
        .iter()
        .zip(test_scores)
        .map(|(s, score)| Ok((sequence_statistic(score).map_err(ThresholdError::from)?, truth_of(s)?)))
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let (tau_best, f1_best) = fit_statistics(&test)?;
    Ok(DayScores {
        day,
        f1_us: f1_at(&test, tau_us),
        tau_us,
        tau_best,
        f1_best,
        validation,
        test,
    })
}

type Partition<'a> = (&'a [Arc<Sequence>], &'a [Arc<Sequence>]);

/// Splits the day-`day` cumulative split into (training, validation) by recording order.
fn partition(
    dataset: &Dataset,
    day: usize,
    fraction: f64,
) -> Result<Partition<'_>, HarnessError> {
    let split = dataset.split(day);
    if split.len() < 2 {
        return Err(HarnessError::SplitTooSmall {
            day,
            size: split.len(),
        });
    }
    let n_val = validation_size(split.len(), fraction);
    Ok(split.split_at(split.len() - n_val))
}

/// Fits the reference scorer at each round day and scores validation and test.
pub fn generated_day_scores(
    dataset: &Dataset,
    cfg: &ExperimentConfig,
) -> Result<Vec<DayScores>, HarnessError> {
    cfg.round_days
        .iter()
        .map(|&day| {
            let (train, val) = partition(dataset, day, cfg.validation_fraction)?;
            let scorer = ReferenceScorer::fit(&ScorerConfig {
                window: cfg.window,
                training: train.to_vec(),
            })?;
            let val_scores = scorer.score_all(val)?;
            let test_scores = scorer.score_all(&dataset.test)?;
            let validation = val
                .iter()
                .cloned()
                .zip(val_scores)
                .map(|(s, a)| Candidate::new(s, a))
                .collect();
            finish_day(day, validation, &dataset.test, &test_scores)
        })
        .collect()
}

fn external_day_scores(
    src: &ExternalSource,
    fold: u64,
    cfg: &ExperimentConfig,
) -> Result<Vec<DayScores>, HarnessError> {
    let unlabelled: Vec<Arc<Sequence>> = read_sequences(&src.unlabelled_path(fold))?
        .into_iter()
        .map(Arc::new)
        .collect();
    let test: Vec<Arc<Sequence>> = read_sequences(&src.test_path(fold))?
        .into_iter()
        .map(Arc::new)
        .collect();
    let dataset = Dataset { unlabelled, test };
    cfg.round_days
        .iter()
        .map(|&day| {
            let (_, val) = partition(&dataset, day, cfg.validation_fraction)?;
            let known: Vec<Arc<Sequence>> = val.iter().chain(&dataset.test).cloned().collect();
            let loaded = load_scores(&src.scores_path(fold, day), &known)?;
            let mut by_id: BTreeMap<String, AnomalyScore> = loaded
                .scores
                .into_iter()
                .map(|s| (s.sequence_id.clone(), s))
                .collect();
            let mut take = |s: &Arc<Sequence>| {
                by_id.remove(&s.id).ok_or_else(|| HarnessError::MissingScore {
                    day,
                    id: s.id.clone(),
                })
            };
            let validation = val
                .iter()
                .map(|s| Ok(Candidate::new(s.clone(), take(s)?)))
                .collect::<Result<Vec<_>, HarnessError>>()?;
            let test_scores = dataset.test.iter().map(&mut take).collect::<Result<Vec<_>, _>>()?;
            finish_day(day, validation, &dataset.test, &test_scores)
        })
        .collect()
}

/// Scores for every round day of one fold.
pub fn fold_day_scores(cfg: &ExperimentConfig, fold: u64) -> Result<Vec<DayScores>, HarnessError> {
    match &cfg.data_source {
        DataSource::Generated(g) => {
            let gen = crate::synthetic::GeneratorConfig {
                seed: fold,
                ..g.clone()
            };
            generated_day_scores(&generate_dataset(&gen)?, cfg)
        }
        DataSource::External(src) => external_day_scores(src, fold, cfg),
    }
}

/// Outcome of one round day within one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub day: usize,
    pub selected: Vec<String>,
    pub clamped: bool,
    pub labelled: usize,
    pub mislabelled: usize,
    pub tau: f64,
    pub f1: f64,
}

/// One (strategy, budget, p_m, fold, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub strategy: StrategyKind,
    pub budget: usize,
    pub p_m: f64,
    pub fold: u64,
    pub seed: u64,
    pub days: Vec<DayRecord>,
}

/// Identity of a run within an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunKey {
    pub strategy: StrategyKind,
    pub budget: usize,
    pub p_m: f64,
    pub fold: u64,
    pub seed: u64,
}

/// Runs the query/label/refit loop over precomputed day scores.
pub fn run_protocol(key: RunKey, days: &[DayScores]) -> Result<RunRecord, HarnessError> {
    let oracle_cfg = OracleConfig::new(key.p_m)?;
    let mut strategy_rng = SeededRng::derive(key.seed, &[key.fold], "strategy");
    let mut oracle = SimulatedOracle::new(oracle_cfg, SeededRng::derive(key.seed, &[key.fold], "oracle"));

    let mut queried: Vec<Queried> = Vec::new();
    let mut tau: Option<f64> = None;
    let mut records = Vec::with_capacity(days.len());
    for (round, day) in days.iter().enumerate() {
        let taken: HashSet<&str> = queried.iter().map(|q| q.id()).collect();
        let pool: Vec<Candidate> = day
            .validation
            .iter()
            .filter(|c| !taken.contains(c.id()))
            .cloned()
            .collect();
        let mut state = QueryState::with_queried(pool, std::mem::take(&mut queried), round)
            .map_err(StrategyError::from)?;

        let mut req = RoundRequest::new(key.strategy, key.budget);
        req.threshold_hint = if key.strategy == StrategyKind::Uqs { tau } else { None };
        let selection = select(&state, &req, &mut strategy_rng)?;

        let mut mislabelled = 0;
        commit::<HarnessError>(&mut state, &selection, |c| {
            let truth = c.sequence.truth;
            let label = oracle.label(c.id(), truth)?;
            if Some(label.value) != truth {
                mislabelled += 1;
            }
            Ok(label)
        })?;
        state.advance_round();

        let fitted = fit_threshold(&state.labelled())?;
        tau = Some(fitted.value);
        records.push(DayRecord {
            day: day.day,
            selected: selection.ids,
            clamped: selection.clamped,
            labelled: state.queried().len(),
            mislabelled,
            tau: fitted.value,
            f1: f1_at(&day.test, fitted.value),
        });
        queried = state.queried().to_vec();
    }
    Ok(RunRecord {
        strategy: key.strategy,
        budget: key.budget,
        p_m: key.p_m,
        fold: key.fold,
        seed: key.seed,
        days: records,
    })
}

/// Runs every configured combination and assembles the report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    // Unreadable or inconsistent fold data is fatal; only protocol runs fail softly.
    let per_fold: Vec<(u64, Vec<DayScores>)> = cfg
        .folds
        .par_iter()
        .map(|&fold| fold_day_scores(cfg, fold).map(|d| (fold, d)))
        .collect::<Result<_, _>>()?;

    let mut keys = Vec::new();
    for &strategy in &cfg.strategy {
        for &budget in &cfg.budget {
            for &p_m in &cfg.p_m {
                for &fold in &cfg.folds {
                    for &seed in &cfg.seeds {
                        keys.push(RunKey {
                            strategy,
                            budget,
                            p_m,
                            fold,
                            seed,
                        });
                    }
                }
            }
        }
    }
    info!("running {} protocol runs over {} folds", keys.len(), cfg.folds.len());

    let fold_scores = |fold: u64| {
        per_fold
            .iter()
            .find(|(f, _)| *f == fold)
            .map(|(_, r)| r)
            .expect("every fold was scored")
    };
    let outcomes: Vec<(RunKey, Result<RunRecord, String>)> = keys
        .par_iter()
        .map(|&key| {
            let result = run_protocol(key, fold_scores(key.fold)).map_err(|e| e.to_string());
            (key, result)
        })
        .collect();

    let baselines: Vec<(u64, &[DayScores])> = per_fold
        .iter()
        .map(|(fold, d)| (*fold, d.as_slice()))
        .collect();
    report::assemble(cfg, &baselines, outcomes)
}
