use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::chart::render_chart;
use super::{DayScores, ExperimentConfig, HarnessError, RunKey, RunRecord};
use crate::evaluation::{aggregate, MetricSummary};
use crate::strategies::StrategyKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub tool: String,
    pub version: String,
    /// How the ± column is formed.
    pub aggregation: String,
    pub config: ExperimentConfig,
}

/// F1 summary for one (strategy, budget, p_m, day).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub strategy: StrategyKind,
    pub budget: usize,
    pub p_m: f64,
    pub day: usize,
    pub f1: MetricSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaselineKind {
    #[serde(rename = "tau_us")]
    Unsupervised,
    #[serde(rename = "tau_best")]
    Best,
}

impl BaselineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineKind::Unsupervised => "tau_us",
            BaselineKind::Best => "tau_best",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub kind: BaselineKind,
    pub day: usize,
    pub f1: MetricSummary,
}

/// Per-fold baseline thresholds and their test F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRun {
    pub fold: u64,
    pub day: usize,
    pub tau_us: f64,
    pub f1_us: f64,
    pub tau_best: f64,
    pub f1_best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub strategy: StrategyKind,
    pub budget: usize,
    pub p_m: f64,
    pub fold: u64,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub provenance: ReportProvenance,
    pub cells: Vec<Cell>,
    pub baselines: Vec<BaselineRow>,
    pub runs: Vec<RunRecord>,
    pub baseline_runs: Vec<BaselineRun>,
    pub failures: Vec<RunFailure>,
}

impl ExperimentReport {
    pub fn cell(&self, strategy: StrategyKind, budget: usize, p_m: f64, day: usize) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.strategy == strategy && c.budget == budget && c.p_m == p_m && c.day == day)
    }

    pub fn baseline(&self, kind: BaselineKind, day: usize) -> Option<&BaselineRow> {
        self.baselines.iter().find(|b| b.kind == kind && b.day == day)
    }

    /// Comma-separated summary table, strategy rows then baseline rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy,budget,p_m,day,f1_mean,f1_std,n_runs\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.strategy, c.budget, c.p_m, c.day, c.f1.mean, c.f1.std, c.f1.n_runs
            );
        }
        for b in &self.baselines {
            let _ = writeln!(
                out,
                "{},,,{},{},{},{}",
                b.kind.as_str(),
                b.day,
                b.f1.mean,
                b.f1.std,
                b.f1.n_runs
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes to JSON");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

pub(super) fn assemble(
    cfg: &ExperimentConfig,
    baselines: &[(u64, &[DayScores])],
    outcomes: Vec<(RunKey, Result<RunRecord, String>)>,
) -> Result<ExperimentReport, HarnessError> {
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (key, outcome) in outcomes {
        match outcome {
            Ok(r) => runs.push(r),
            Err(message) => {
                log::warn!(
                    "run {} B={} p_m={} fold={} seed={} failed: {message}",
                    key.strategy,
                    key.budget,
                    key.p_m,
                    key.fold,
                    key.seed
                );
                failures.push(RunFailure {
                    strategy: key.strategy,
                    budget: key.budget,
                    p_m: key.p_m,
                    fold: key.fold,
                    seed: key.seed,
                    message,
                })
            }
        }
    }

    let mut cells = Vec::new();
    for &strategy in &cfg.strategy {
        for &budget in &cfg.budget {
            for &p_m in &cfg.p_m {
                for (i, &day) in cfg.round_days.iter().enumerate() {
                    let values: Vec<f64> = runs
                        .iter()
                        .filter(|r| r.strategy == strategy && r.budget == budget && r.p_m == p_m)
                        .map(|r| r.days[i].f1)
                        .collect();
                    if let Ok(f1) = aggregate(&values) {
                        cells.push(Cell {
                            strategy,
                            budget,
                            p_m,
                            day,
                            f1,
                        });
                    }
                }
            }
        }
    }

    // Baselines do not depend on the protocol seed; each fold counts once per seed so the
    // rows pool the same folds × seeds grid as the strategy rows.
    let mut baseline_runs = Vec::new();
    let mut baseline_rows = Vec::new();
    for (i, &day) in cfg.round_days.iter().enumerate() {
        let mut us = Vec::new();
        let mut best = Vec::new();
        for (fold, days) in baselines {
            let d = &days[i];
            baseline_runs.push(BaselineRun {
                fold: *fold,
                day,
                tau_us: d.tau_us,
                f1_us: d.f1_us,
                tau_best: d.tau_best,
                f1_best: d.f1_best,
            });
            for _ in &cfg.seeds {
                us.push(d.f1_us);
                best.push(d.f1_best);
            }
        }
        if let (Ok(u), Ok(b)) = (aggregate(&us), aggregate(&best)) {
            baseline_rows.push(BaselineRow {
                kind: BaselineKind::Unsupervised,
                day,
                f1: u,
            });
            baseline_rows.push(BaselineRow {
                kind: BaselineKind::Best,
                day,
                f1: b,
            });
        }
    }

    Ok(ExperimentReport {
        provenance: ReportProvenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            aggregation: "mean and sample std pooled over folds x seeds".to_string(),
            config: cfg.clone(),
        },
        cells,
        baselines: baseline_rows,
        runs,
        baseline_runs,
        failures,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|source| HarnessError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `summary.csv`, `report.json` and one SVG chart per (budget, p_m) into `out_dir`.
pub fn emit_report(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    if report.cells.is_empty() && report.baselines.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    fs::create_dir_all(out_dir).map_err(|source| HarnessError::Write {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();

    let csv = out_dir.join("summary.csv");
    write(&csv, &report.to_csv())?;
    written.push(csv);

    let json = out_dir.join("report.json");
    write(&json, &report.to_json())?;
    written.push(json);

    let cfg = &report.provenance.config;
    for &budget in &cfg.budget {
        for &p_m in &cfg.p_m {
            let svg = render_chart(report, budget, p_m);
            let path = out_dir.join(format!("f1_vs_day_B{budget}_pm{p_m}.svg"));
            write(&path, &svg)?;
            written.push(path);
        }
    }
    Ok(written)
}
