//! Seeded stand-in for a real detector pipeline: a generator of day-split discrete
//! sequences with injected anomalies, a nearest-window reference scorer, and ingestion of
//! externally produced score files.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::path::Path;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{read_jsonl, write_jsonl, IoError};
use crate::model::{AnomalyScore, LabelValue, Sequence};
use crate::rng::SeededRng;

pub const SECONDS_PER_DAY: u64 = 86_400;

const N_MODES: usize = 3;
const NOISE_STD: f64 = 0.1;

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("reference scorer needs a non-empty training set")]
    EmptyTraining,
    #[error("window must be at least 1")]
    ZeroWindow,
    #[error("sequence `{id}` has {steps} steps, shorter than window {window}")]
    TooShort {
        id: String,
        steps: usize,
        window: usize,
    },
    #[error("sequence `{id}` has {got} channels, training set has {expected}")]
    ChannelMismatch {
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: unknown sequence id `{id}`")]
    UnknownId { line: usize, id: String },
    #[error("line {line}: score for `{id}` has {got} values, sequence has {expected} steps")]
    LengthMismatch {
        line: usize,
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: {message}")]
    InvalidScore { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n_days: usize,
    pub sequences_per_day: usize,
    pub channels: usize,
    /// Inclusive `(min, max)` number of time steps.
    pub length_range: (usize, usize),
    pub anomaly_rate: f64,
    /// Size of the held-out labelled test subset.
    pub test_sequences: usize,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_days: 28,
            sequences_per_day: 12,
            channels: 2,
            length_range: (48, 96),
            anomaly_rate: 0.1,
            test_sequences: 80,
            seed: 1,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), SyntheticError> {
        let bad = |m: &str| Err(SyntheticError::InvalidConfig(m.to_string()));
        if self.n_days == 0 || self.sequences_per_day == 0 || self.channels == 0 {
            return bad("n_days, sequences_per_day and channels must be positive");
        }
        let (lo, hi) = self.length_range;
        if lo == 0 || lo > hi {
            return bad("length_range must satisfy 1 <= min <= max");
        }
        if !(0.0..=1.0).contains(&self.anomaly_rate) {
            return bad("anomaly_rate must lie in [0, 1]");
        }
        if self.sequences_per_day as u64 > SECONDS_PER_DAY {
            return bad("more sequences per day than seconds in a day");
        }
        Ok(())
    }
}

/// One smooth regime of one channel: level + ramp over the sequence + sinusoid.
#[derive(Debug, Clone, Copy)]
struct ChannelPattern {
    level: f64,
    ramp: f64,
    amplitude: f64,
    period: f64,
}

#[derive(Debug, Clone, Copy)]
enum Effect {
    Offset(f64),
    Amplitude(f64),
    FrequencyDrift(f64),
}

fn pattern_library(cfg: &GeneratorConfig) -> Vec<Vec<ChannelPattern>> {
    let mut rng = SeededRng::derive(cfg.seed, &[], "pattern-library");
    (0..N_MODES)
        .map(|mode| {
            (0..cfg.channels)
                .map(|c| {
                    let ramped = (mode + c) % 2 == 1;
                    ChannelPattern {
                        level: rng.uniform(-1.0, 1.0),
                        ramp: if ramped { rng.uniform(-1.0, 1.0) } else { 0.0 },
                        amplitude: rng.uniform(0.5, 1.2),
                        period: rng.uniform(12.0, 30.0),
                    }
                })
                .collect()
        })
        .collect()
}

fn generate_sequence(
    id: String,
    duration_s: f64,
    cfg: &GeneratorConfig,
    library: &[Vec<ChannelPattern>],
    rng: &mut SeededRng,
) -> Sequence {
    let steps = rng.range_inclusive(cfg.length_range.0, cfg.length_range.1);
    let mode = &library[rng.index(library.len())];
    let jitter: Vec<(f64, f64)> = (0..cfg.channels)
        .map(|_| (rng.uniform(0.9, 1.1), rng.uniform(0.0, TAU)))
        .collect();

    let anomalous = rng.bernoulli(cfg.anomaly_rate);
    let anomaly = anomalous.then(|| {
        let len = rng.range_inclusive((steps / 5).max(1), (steps / 3).max(1));
        let start = rng.index(steps - len + 1);
        let effect = match rng.index(3) {
            0 => {
                let sign = if rng.bernoulli(0.5) { 1.0 } else { -1.0 };
                Effect::Offset(sign * rng.uniform(0.15, 0.8))
            }
            1 => Effect::Amplitude(rng.uniform(1.2, 2.0)),
            _ => Effect::FrequencyDrift(rng.uniform(1.2, 1.8)),
        };
        let mut hit: Vec<bool> = (0..cfg.channels).map(|_| rng.bernoulli(0.5)).collect();
        if !hit.iter().any(|&h| h) {
            let c = rng.index(cfg.channels);
            hit[c] = true;
        }
        (start, start + len, effect, hit)
    });

    let mut channels = vec![vec![0.0; cfg.channels]; steps];
    for (c, p) in mode.iter().enumerate() {
        let (amp_jitter, phase) = jitter[c];
        for (t, row) in channels.iter_mut().enumerate() {
            let tf = t as f64;
            let mut amplitude = p.amplitude * amp_jitter;
            let mut angle = TAU * tf / p.period + phase;
            let mut offset = 0.0;
            if let Some((start, end, effect, hit)) = &anomaly {
                if hit[c] && (*start..*end).contains(&t) {
                    match *effect {
                        Effect::Offset(o) => offset = o,
                        Effect::Amplitude(k) => amplitude *= k,
                        Effect::FrequencyDrift(k) => {
                            let s = *start as f64;
                            angle = TAU * (s + (tf - s) * k) / p.period + phase;
                        }
                    }
                }
            }
            row[c] = p.level
                + p.ramp * tf / steps as f64
                + amplitude * angle.sin()
                + offset
                + NOISE_STD * rng.standard_normal();
        }
    }
    Sequence {
        id,
        duration_s,
        channels,
        truth: Some(if anomalous {
            LabelValue::Anomalous
        } else {
            LabelValue::Nominal
        }),
    }
}

/// Whole-second durations for one day's sequences, summing to exactly one day.
fn day_durations(per_day: usize) -> Vec<f64> {
    let base = SECONDS_PER_DAY / per_day as u64;
    let mut d = vec![base as f64; per_day];
    d[per_day - 1] += (SECONDS_PER_DAY - base * per_day as u64) as f64;
    d
}

/// Recorded sequences in recording order plus a labelled test subset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub unlabelled: Vec<Arc<Sequence>>,
    pub test: Vec<Arc<Sequence>>,
}

impl Dataset {
    /// The cumulative split holding every sequence recorded up to the end of `day`.
    pub fn split(&self, day: usize) -> &[Arc<Sequence>] {
        let n = split_len(&self.unlabelled, day);
        &self.unlabelled[..n]
    }

    /// Number of days spanned by the recorded sequences.
    pub fn n_days(&self) -> usize {
        day_of_each(&self.unlabelled).last().copied().unwrap_or(0)
    }
}

/// 1-based recording day of each sequence, from cumulative durations.
pub fn day_of_each<S: AsRef<Sequence>>(sequences: &[S]) -> Vec<usize> {
    let mut start = 0.0;
    sequences
        .iter()
        .map(|s| {
            let day = (start / SECONDS_PER_DAY as f64).floor() as usize + 1;
            start += s.as_ref().duration_s;
            day
        })
        .collect()
}

/// Length of the prefix recorded on days `1..=day`.
pub fn split_len<S: AsRef<Sequence>>(sequences: &[S], day: usize) -> usize {
    day_of_each(sequences).iter().take_while(|&&d| d <= day).count()
}

/// Generates the recorded sequences for `n_days` and an independent test subset.
///
/// Each sequence is drawn from its own derived random stream, so its content depends only
/// on the seed and its position.
pub fn generate_dataset(cfg: &GeneratorConfig) -> Result<Dataset, SyntheticError> {
    cfg.validate()?;
    let library = pattern_library(cfg);
    let durations = day_durations(cfg.sequences_per_day);
    let unlabelled = (0..cfg.n_days * cfg.sequences_per_day)
        .map(|i| {
            let (day, slot) = (i / cfg.sequences_per_day, i % cfg.sequences_per_day);
            let mut rng = SeededRng::derive(cfg.seed, &[0, i as u64], "sequence");
            let id = format!("d{:02}-s{:03}", day + 1, slot);
            Arc::new(generate_sequence(id, durations[slot], cfg, &library, &mut rng))
        })
        .collect();
    let test = (0..cfg.test_sequences)
        .map(|i| {
            let mut rng = SeededRng::derive(cfg.seed, &[1, i as u64], "sequence");
            let duration = durations[i % cfg.sequences_per_day];
            Arc::new(generate_sequence(format!("t{i:04}"), duration, cfg, &library, &mut rng))
        })
        .collect();
    Ok(Dataset { unlabelled, test })
}

#[derive(Debug, Clone)]
pub struct ScorerConfig {
    pub window: usize,
    pub training: Vec<Arc<Sequence>>,
}

/// Nearest-training-window scorer.
///
/// The score at step `t` is the smallest channel-averaged Euclidean distance between the
/// query window ending at `t` and any training window of the same length. The first
/// `window - 1` steps repeat the first computed value.
#[derive(Debug, Clone)]
pub struct ReferenceScorer {
    window: usize,
    dims: usize,
    /// Channel-major training data: `training[s][c]` is channel `c` of sequence `s`.
    training: Vec<Vec<Vec<f64>>>,
}

fn channel_major(seq: &Sequence) -> Vec<Vec<f64>> {
    (0..seq.dims()).map(|c| seq.channel(c)).collect()
}

impl ReferenceScorer {
    pub fn fit(cfg: &ScorerConfig) -> Result<Self, SyntheticError> {
        if cfg.window == 0 {
            return Err(SyntheticError::ZeroWindow);
        }
        let first = cfg.training.first().ok_or(SyntheticError::EmptyTraining)?;
        let dims = first.dims();
        let mut training = Vec::with_capacity(cfg.training.len());
        for seq in &cfg.training {
            if seq.dims() != dims {
                return Err(SyntheticError::ChannelMismatch {
                    id: seq.id.clone(),
                    expected: dims,
                    got: seq.dims(),
                });
            }
            // Training sequences shorter than the window contribute no windows.
            if seq.steps() >= cfg.window {
                training.push(channel_major(seq));
            }
        }
        if training.is_empty() {
            return Err(SyntheticError::EmptyTraining);
        }
        Ok(Self {
            window: cfg.window,
            dims,
            training,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn score(&self, seq: &Sequence) -> Result<AnomalyScore, SyntheticError> {
        if seq.dims() != self.dims {
            return Err(SyntheticError::ChannelMismatch {
                id: seq.id.clone(),
                expected: self.dims,
                got: seq.dims(),
            });
        }
        let steps = seq.steps();
        if steps < self.window {
            return Err(SyntheticError::TooShort {
                id: seq.id.clone(),
                steps,
                window: self.window,
            });
        }
        let query = channel_major(seq);
        let w = self.window;
        let mut values = Vec::with_capacity(steps);
        for end in w - 1..steps {
            let start = end + 1 - w;
            let q: Vec<&[f64]> = query.iter().map(|ch| &ch[start..=end]).collect();
            values.push(self.nearest(&q));
        }
        let first = values[0];
        let mut full = vec![first; w - 1];
        full.extend(values);
        Ok(AnomalyScore::new(seq.id.clone(), full))
    }

    /// Smallest channel-averaged distance from `q` to any training window.
    ///
    /// Windows are abandoned once their partial sum can no longer beat the best so far;
    /// the returned minimum is unaffected.
    fn nearest(&self, q: &[&[f64]]) -> f64 {
        let w = self.window;
        let d = self.dims as f64;
        let mut best = f64::INFINITY;
        for seq in &self.training {
            let len = seq[0].len();
            'window: for start in 0..=len - w {
                let mut total = 0.0;
                for (c, qc) in q.iter().enumerate() {
                    let tc = &seq[c][start..start + w];
                    // Channel distance needed to reach `best`: sqrt(ss) >= best*d - total.
                    let slack = best * d - total;
                    let limit = slack * slack;
                    let mut ss = 0.0;
                    for (a, b) in qc.iter().zip(tc) {
                        ss += (a - b) * (a - b);
                        if slack <= 0.0 || ss >= limit {
                            continue 'window;
                        }
                    }
                    total += ss.sqrt();
                }
                let dist = total / d;
                if dist < best {
                    best = dist;
                }
            }
        }
        best
    }

    /// Scores many sequences in parallel, preserving order.
    pub fn score_all<S: AsRef<Sequence> + Sync>(
        &self,
        sequences: &[S],
    ) -> Result<Vec<AnomalyScore>, SyntheticError> {
        sequences.par_iter().map(|s| self.score(s.as_ref())).collect()
    }
}

/// Fits a scorer on `cfg.training` and scores one sequence.
pub fn reference_score(seq: &Sequence, cfg: &ScorerConfig) -> Result<AnomalyScore, SyntheticError> {
    ReferenceScorer::fit(cfg)?.score(seq)
}

#[derive(Debug, Clone, Default)]
pub struct LoadedScores {
    pub scores: Vec<AnomalyScore>,
    pub warnings: Vec<String>,
}

/// Reads a score file and binds every record to a known sequence.
pub fn load_scores<S: AsRef<Sequence>>(
    path: &Path,
    sequences: &[S],
) -> Result<LoadedScores, SyntheticError> {
    let by_id: HashMap<&str, &Sequence> = sequences
        .iter()
        .map(|s| (s.as_ref().id.as_str(), s.as_ref()))
        .collect();
    let records: Vec<(usize, AnomalyScore)> = read_jsonl(path)?;
    let mut out = LoadedScores::default();
    if records.is_empty() {
        let msg = format!("{}: no score records", path.display());
        warn!("{msg}");
        out.warnings.push(msg);
        return Ok(out);
    }
    for (line, score) in records {
        let seq = by_id
            .get(score.sequence_id.as_str())
            .ok_or_else(|| SyntheticError::UnknownId {
                line,
                id: score.sequence_id.clone(),
            })?;
        if score.values.len() != seq.steps() {
            return Err(SyntheticError::LengthMismatch {
                line,
                id: score.sequence_id.clone(),
                expected: seq.steps(),
                got: score.values.len(),
            });
        }
        score.validate().map_err(|e| SyntheticError::InvalidScore {
            line,
            message: e.to_string(),
        })?;
        out.scores.push(score);
    }
    Ok(out)
}

pub fn write_scores(path: &Path, scores: &[AnomalyScore]) -> Result<(), SyntheticError> {
    Ok(write_jsonl(path, scores)?)
}

pub fn read_sequences(path: &Path) -> Result<Vec<Sequence>, SyntheticError> {
    let records: Vec<(usize, Sequence)> = read_jsonl(path)?;
    records
        .into_iter()
        .map(|(line, s)| {
            s.validate().map_err(|e| {
                SyntheticError::Io(IoError::record(path, line, e.to_string()))
            })?;
            Ok(s)
        })
        .collect()
}

pub fn write_sequences<S: AsRef<Sequence>>(path: &Path, sequences: &[S]) -> Result<(), SyntheticError> {
    Ok(write_jsonl(path, sequences.iter().map(AsRef::as_ref))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sequence_statistic;

    fn small_config(seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            n_days: 3,
            sequences_per_day: 5,
            test_sequences: 6,
            seed,
            ..GeneratorConfig::default()
        }
    }

    fn flat(id: &str, values: &[f64]) -> Sequence {
        Sequence {
            id: id.into(),
            duration_s: 1.0,
            channels: values.iter().map(|&v| vec![v]).collect(),
            truth: None,
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_dataset(&small_config(4)).unwrap();
        let b = generate_dataset(&small_config(4)).unwrap();
        assert_eq!(a, b);
        let c = generate_dataset(&small_config(5)).unwrap();
        assert_ne!(a, c);
        for s in a.unlabelled.iter().chain(&a.test) {
            s.validate().unwrap();
            assert_eq!(s.dims(), 2);
            assert!((48..=96).contains(&s.steps()));
        }
    }

    #[test]
    fn zero_rate_gives_no_anomalies() {
        let cfg = GeneratorConfig {
            anomaly_rate: 0.0,
            ..small_config(2)
        };
        let d = generate_dataset(&cfg).unwrap();
        assert!(d
            .unlabelled
            .iter()
            .chain(&d.test)
            .all(|s| s.truth == Some(LabelValue::Nominal)));
    }

    #[test]
    fn anomaly_fraction_concentrates() {
        // Binomial(2000, 0.05) has std ~0.0049; [0.03, 0.07] is a 4-sigma band.
        let cfg = GeneratorConfig {
            n_days: 1,
            sequences_per_day: 2000,
            anomaly_rate: 0.05,
            length_range: (8, 8),
            test_sequences: 0,
            ..GeneratorConfig::default()
        };
        let d = generate_dataset(&cfg).unwrap();
        let anomalous = d
            .unlabelled
            .iter()
            .filter(|s| s.truth == Some(LabelValue::Anomalous))
            .count();
        let frac = anomalous as f64 / 2000.0;
        assert!((0.03..=0.07).contains(&frac), "fraction {frac}");
    }

    #[test]
    fn splits_are_cumulative_by_day() {
        let d = generate_dataset(&small_config(1)).unwrap();
        assert_eq!(d.split(1).len(), 5);
        assert_eq!(d.split(2).len(), 10);
        assert_eq!(d.split(3).len(), 15);
        assert_eq!(d.split(9).len(), 15);
        assert_eq!(d.n_days(), 3);
        let day_total: f64 = d.split(1).iter().map(|s| s.duration_s).sum();
        assert_eq!(day_total, SECONDS_PER_DAY as f64);
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            GeneratorConfig { n_days: 0, ..small_config(1) },
            GeneratorConfig { length_range: (10, 5), ..small_config(1) },
            GeneratorConfig { anomaly_rate: 1.5, ..small_config(1) },
        ];
        for cfg in bad {
            assert!(matches!(generate_dataset(&cfg), Err(SyntheticError::InvalidConfig(_))));
        }
    }

    #[test]
    fn self_match_scores_zero() {
        let d = generate_dataset(&small_config(3)).unwrap();
        let cfg = ScorerConfig {
            window: 8,
            training: d.unlabelled[..4].to_vec(),
        };
        let scorer = ReferenceScorer::fit(&cfg).unwrap();
        for s in &d.unlabelled[..4] {
            let score = scorer.score(s).unwrap();
            assert_eq!(score.values.len(), s.steps());
            assert!(score.values.iter().all(|&v| (0.0..=1e-9).contains(&v)));
        }
        let other = reference_score(&d.unlabelled[7], &cfg).unwrap();
        assert!(other.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn spike_peaks_where_windows_cover_it() {
        let train = Arc::new(flat("train", &[0.0; 20]));
        let mut values = [0.0; 12];
        values[6] = 5.0;
        let query = flat("q", &values);
        let cfg = ScorerConfig {
            window: 3,
            training: vec![train],
        };
        let score = reference_score(&query, &cfg).unwrap();
        // Windows ending at 6, 7 and 8 contain the spike: distance sqrt(25) / 1 channel.
        for (t, &v) in score.values.iter().enumerate() {
            let expected = if (6..=8).contains(&t) { 5.0 } else { 0.0 };
            assert_eq!(v, expected, "step {t}");
        }
    }

    #[test]
    fn scorer_preconditions() {
        let train = Arc::new(flat("train", &[0.0; 5]));
        let cfg = ScorerConfig {
            window: 4,
            training: vec![train],
        };
        let short = flat("short", &[0.0; 3]);
        assert!(matches!(
            reference_score(&short, &cfg),
            Err(SyntheticError::TooShort { .. })
        ));
        let two = Sequence {
            id: "two".into(),
            duration_s: 1.0,
            channels: vec![vec![0.0, 0.0]; 6],
            truth: None,
        };
        assert!(matches!(
            reference_score(&two, &cfg),
            Err(SyntheticError::ChannelMismatch { .. })
        ));
        let empty = ScorerConfig {
            window: 4,
            training: vec![],
        };
        assert!(matches!(ReferenceScorer::fit(&empty), Err(SyntheticError::EmptyTraining)));
    }

    /// Unpruned nearest-window search, as an oracle for the abandoning version.
    fn nearest_brute(train: &[Arc<Sequence>], seq: &Sequence, w: usize) -> Vec<f64> {
        let d = seq.dims();
        let mut out = vec![];
        for end in w - 1..seq.steps() {
            let mut best = f64::INFINITY;
            for t in train {
                for s in 0..=t.steps() - w {
                    let total: f64 = (0..d)
                        .map(|c| {
                            (0..w)
                                .map(|k| (seq.channels[end + 1 - w + k][c] - t.channels[s + k][c]).powi(2))
                                .sum::<f64>()
                                .sqrt()
                        })
                        .sum();
                    best = best.min(total / d as f64);
                }
            }
            out.push(best);
        }
        let mut full = vec![out[0]; w - 1];
        full.extend(out);
        full
    }

    #[test]
    fn pruned_search_matches_brute_force() {
        let d = generate_dataset(&small_config(6)).unwrap();
        let train = d.unlabelled[..5].to_vec();
        let scorer = ReferenceScorer::fit(&ScorerConfig { window: 6, training: train.clone() }).unwrap();
        for s in &d.test[..3] {
            let got = scorer.score(s).unwrap().values;
            let want = nearest_brute(&train, s, 6);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn anomalies_score_higher_on_average() {
        let d = generate_dataset(&GeneratorConfig::default()).unwrap();
        let train: Vec<_> = d.unlabelled[..250].to_vec();
        let scorer = ReferenceScorer::fit(&ScorerConfig { window: 8, training: train }).unwrap();
        let scores = scorer.score_all(&d.test).unwrap();
        let (mut nom, mut ano) = (vec![], vec![]);
        for (s, seq) in scores.iter().zip(&d.test) {
            let stat = sequence_statistic(s).unwrap();
            match seq.truth {
                Some(LabelValue::Anomalous) => ano.push(stat),
                _ => nom.push(stat),
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(!ano.is_empty());
        assert!(mean(&ano) > mean(&nom), "anomalous {} nominal {}", mean(&ano), mean(&nom));
    }

    #[test]
    fn load_scores_validates_records() {
        let dir = tempfile::tempdir().unwrap();
        let seqs = vec![flat("a", &[0.0, 1.0]), flat("b", &[0.0])];
        let path = dir.path().join("scores.jsonl");
        let scores = vec![AnomalyScore::new("a", vec![0.1, 0.2]), AnomalyScore::new("b", vec![3.0])];
        write_scores(&path, &scores).unwrap();
        assert_eq!(load_scores(&path, &seqs).unwrap().scores, scores);

        std::fs::write(
            &path,
            "{\"sequence_id\":\"a\",\"values\":[0.1,0.2]}\n{\"sequence_id\":\"b\",\"values\":[1,2]}\n",
        )
        .unwrap();
        let err = load_scores(&path, &seqs).unwrap_err();
        assert!(matches!(err, SyntheticError::LengthMismatch { line: 2, .. }), "{err}");

        std::fs::write(&path, "{\"sequence_id\":\"zz\",\"values\":[1]}\n").unwrap();
        assert!(matches!(
            load_scores(&path, &seqs).unwrap_err(),
            SyntheticError::UnknownId { line: 1, .. }
        ));

        std::fs::write(&path, "").unwrap();
        let loaded = load_scores(&path, &seqs).unwrap();
        assert!(loaded.scores.is_empty());
        assert_eq!(loaded.warnings.len(), 1);
    }
}
