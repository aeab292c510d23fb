use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use super::HarnessError;
use crate::strategies::StrategyKind;
use crate::synthetic::GeneratorConfig;

/// A benchmark run. `strategy`, `budget` and `p_m` accept either a single value or a list;
/// every combination is run over every fold and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(deserialize_with = "one_or_many")]
    pub strategy: Vec<StrategyKind>,
    #[serde(deserialize_with = "one_or_many")]
    pub budget: Vec<usize>,
    #[serde(deserialize_with = "one_or_many", default = "default_p_m")]
    pub p_m: Vec<f64>,
    #[serde(default = "default_round_days")]
    pub round_days: Vec<usize>,
    /// Generator seeds, one dataset per fold.
    #[serde(default = "default_seeds")]
    pub folds: Vec<u64>,
    /// Protocol seeds driving strategy initialisation and mislabelling.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
    /// Window length of the reference scorer (generated data only).
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub data_source: DataSource,
}

fn default_p_m() -> Vec<f64> {
    vec![0.0]
}

pub fn default_round_days() -> Vec<usize> {
    vec![1, 7, 14, 21, 28]
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}

fn default_validation_fraction() -> f64 {
    0.2
}

fn default_window() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// Synthetic data; the generator `seed` is replaced by each fold seed.
    Generated(GeneratorConfig),
    External(ExternalSource),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Generated(GeneratorConfig::default())
    }
}

/// Externally produced sequences and scores.
///
/// Paths may contain `{fold}`; the score path must also contain `{day}` and point to the
/// scores of the model trained at that round day, covering at least that day's validation
/// sequences and the test subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalSource {
    pub unlabelled: String,
    pub test: String,
    pub scores: String,
}

impl ExternalSource {
    pub fn unlabelled_path(&self, fold: u64) -> PathBuf {
        expand(&self.unlabelled, fold, None)
    }

    pub fn test_path(&self, fold: u64) -> PathBuf {
        expand(&self.test, fold, None)
    }

    pub fn scores_path(&self, fold: u64, day: usize) -> PathBuf {
        expand(&self.scores, fold, Some(day))
    }
}

fn expand(template: &str, fold: u64, day: Option<usize>) -> PathBuf {
    let mut s = template.replace("{fold}", &fold.to_string());
    if let Some(d) = day {
        s = s.replace("{day}", &d.to_string());
    }
    PathBuf::from(s)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

impl ExperimentConfig {
    /// Default protocol for one strategy, budget and mislabel probability.
    pub fn new(strategy: StrategyKind, budget: usize, p_m: f64) -> Self {
        Self {
            strategy: vec![strategy],
            budget: vec![budget],
            p_m: vec![p_m],
            round_days: default_round_days(),
            folds: default_seeds(),
            seeds: default_seeds(),
            validation_fraction: default_validation_fraction(),
            window: default_window(),
            data_source: DataSource::default(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(s).map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidConfig(m));
        if self.strategy.is_empty() || self.budget.is_empty() || self.p_m.is_empty() {
            return bad("strategy, budget and p_m need at least one value".into());
        }
        if self.budget.contains(&0) {
            return bad("budget must be at least 1".into());
        }
        if let Some(p) = self.p_m.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("p_m must lie in [0, 1], got {p}"));
        }
        if self.round_days.is_empty() || self.round_days[0] == 0 {
            return bad("round_days must be non-empty and start at day 1 or later".into());
        }
        if self.round_days.windows(2).any(|w| w[0] >= w[1]) {
            return bad("round_days must be strictly increasing".into());
        }
        if self.folds.is_empty() || self.seeds.is_empty() {
            return bad("folds and seeds need at least one value".into());
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad("validation_fraction must lie in (0, 1)".into());
        }
        if self.window == 0 {
            return bad("window must be at least 1".into());
        }
        if let DataSource::Generated(g) = &self.data_source {
            g.validate()
                .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        }
        Ok(())
    }
}
