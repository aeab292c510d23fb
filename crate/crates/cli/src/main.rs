use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use dqs_core::harness::{emit_report, run_experiment, ExperimentConfig, ExperimentReport};
use dqs_core::io::{read_jsonl, LabelRecord};
use dqs_core::strategies::select;
use dqs_core::synthetic::{
    generate_dataset, load_scores, read_sequences, write_scores, write_sequences, GeneratorConfig,
    ReferenceScorer, ScorerConfig,
};
use dqs_core::thresholding::fit_threshold;
use dqs_core::{
    AnomalyScore, Candidate, Label, Queried, QueryState, RoundRequest, SeededRng, Sequence,
    StrategyKind,
};
use serde::Serialize;

/// Active-learning calibration of anomaly detector thresholds.
#[derive(Debug, Parser)]
#[command(name = "dqs", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset into `unlabelled.jsonl` and `test.jsonl`.
    Generate {
        /// Generator settings (TOML); defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the generator seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the reference scorer on training sequences and score others.
    Score {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8)]
        window: usize,
    },
    /// Run one query round on a pool and print the selected ids.
    Query {
        #[arg(long)]
        sequences: PathBuf,
        #[arg(long)]
        scores: PathBuf,
        /// Labels of sequences already queried; those form the query set.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        strategy: StrategyKind,
        #[arg(long)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Current threshold for UQS; fitted from `--labels` when omitted.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Fit the threshold that maximizes F1 on labelled scores.
    FitThreshold {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Run a full experiment from a config file and write the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-emit the table and charts from a `report.json` dump.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn generate(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut cfg = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str::<GeneratorConfig>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => GeneratorConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let data = generate_dataset(&cfg)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_sequences(&out.join("unlabelled.jsonl"), &data.unlabelled)?;
    write_sequences(&out.join("test.jsonl"), &data.test)?;
    println!(
        "wrote {} unlabelled and {} test sequences to {}",
        data.unlabelled.len(),
        data.test.len(),
        out.display()
    );
    Ok(())
}

fn score(train: &Path, input: &Path, out: &Path, window: usize) -> Result<()> {
    let training: Vec<Arc<Sequence>> = read_sequences(train)?.into_iter().map(Arc::new).collect();
    let scorer = ReferenceScorer::fit(&ScorerConfig { window, training })?;
    let inputs = read_sequences(input)?;
    let scores = scorer.score_all(&inputs)?;
    write_scores(out, &scores)?;
    println!("scored {} sequences into {}", scores.len(), out.display());
    Ok(())
}

fn read_labels(path: &Path) -> Result<Vec<LabelRecord>> {
    let records: Vec<(usize, LabelRecord)> = read_jsonl(path)?;
    let mut seen = HashMap::new();
    for (line, r) in &records {
        if let Some(first) = seen.insert(r.sequence_id.clone(), *line) {
            bail!("{}:{line}: `{}` already labelled on line {first}", path.display(), r.sequence_id);
        }
    }
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

/// Scores keyed by id, bound to `sequences`.
fn scores_by_id(path: &Path, sequences: &[Arc<Sequence>]) -> Result<HashMap<String, AnomalyScore>> {
    let loaded = load_scores(path, sequences)?;
    Ok(loaded
        .scores
        .into_iter()
        .map(|s| (s.sequence_id.clone(), s))
        .collect())
}

fn query(
    sequences: &Path,
    scores: &Path,
    labels: Option<&Path>,
    strategy: StrategyKind,
    budget: usize,
    seed: u64,
    threshold: Option<f64>,
) -> Result<()> {
    let seqs: Vec<Arc<Sequence>> = read_sequences(sequences)?.into_iter().map(Arc::new).collect();
    let mut by_id = scores_by_id(scores, &seqs)?;
    let labels = match labels {
        Some(p) => read_labels(p)?,
        None => Vec::new(),
    };
    let labelled: HashMap<&str, &LabelRecord> =
        labels.iter().map(|r| (r.sequence_id.as_str(), r)).collect();
    if let Some(r) = labels.iter().find(|r| !seqs.iter().any(|s| s.id == r.sequence_id)) {
        bail!("label for unknown sequence `{}`", r.sequence_id);
    }

    let mut candidates = Vec::new();
    let mut queried = Vec::new();
    for s in &seqs {
        let score = by_id
            .remove(&s.id)
            .with_context(|| format!("sequence `{}` has no score", s.id))?;
        match labelled.get(s.id.as_str()) {
            Some(r) => queried.push(Queried {
                sequence: s.clone(),
                score,
                label: Label::new(r.value, r.source),
            }),
            None => candidates.push(Candidate::new(s.clone(), score)),
        }
    }
    let state = QueryState::with_queried(candidates, queried, 0)?;
    let mut req = RoundRequest::new(strategy, budget);
    let tau = match threshold {
        Some(t) => Some(t),
        None if !state.queried().is_empty() => Some(fit_threshold(&state.labelled())?.value),
        None => None,
    };
    if let Some(t) = tau {
        req = req.with_threshold(t);
    }
    let selection = select(&state, &req, &mut SeededRng::new(seed))?;
    if selection.clamped {
        eprintln!(
            "warning: budget {budget} exceeds the {} candidates; selected all",
            state.candidates().len()
        );
    }
    for id in &selection.ids {
        println!("{id}");
    }
    Ok(())
}

#[derive(Serialize)]
struct FitOutput {
    tau: f64,
    f1: f64,
    labels: usize,
}

fn fit(scores: &Path, labels: &Path) -> Result<()> {
    let records: Vec<(usize, AnomalyScore)> = read_jsonl(scores)?;
    let by_id: HashMap<String, AnomalyScore> = records
        .into_iter()
        .map(|(_, s)| (s.sequence_id.clone(), s))
        .collect();
    let pairs = read_labels(labels)?
        .into_iter()
        .map(|r| {
            let s = by_id
                .get(&r.sequence_id)
                .with_context(|| format!("no score for labelled sequence `{}`", r.sequence_id))?;
            Ok((s.clone(), Label::new(r.value, r.source)))
        })
        .collect::<Result<Vec<_>>>()?;
    let tau = fit_threshold(&pairs)?;
    let stats = pairs
        .iter()
        .map(|(s, l)| Ok((s.statistic()?, l.value)))
        .collect::<Result<Vec<_>, dqs_core::model::ModelError>>()?;
    let out = FitOutput {
        tau: tau.value,
        f1: dqs_core::evaluation::f1_at(&stats, tau.value),
        labels: pairs.len(),
    };
    println!("{}", serde_json::to_string(&out)?);
    Ok(())
}

fn run(config: &Path, out: &Path) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let report = run_experiment(&cfg)?;
    for f in &report.failures {
        eprintln!(
            "warning: {} B={} p_m={} fold={} seed={} failed: {}",
            f.strategy, f.budget, f.p_m, f.fold, f.seed, f.message
        );
    }
    for p in emit_report(&report, out)? {
        log::info!("wrote {}", p.display());
    }
    print!("{}", report.to_csv());
    Ok(())
}

fn report(input: &Path, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let report = ExperimentReport::from_json(&text).with_context(|| format!("parsing {}", input.display()))?;
    if let Some(dir) = out {
        emit_report(&report, dir)?;
    }
    print!("{}", report.to_csv());
    Ok(())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Generate { config, seed, out } => generate(config.as_deref(), seed, &out),
        Command::Score {
            train,
            input,
            out,
            window,
        } => score(&train, &input, &out, window),
        Command::Query {
            sequences,
            scores,
            labels,
            strategy,
            budget,
            seed,
            threshold,
        } => query(&sequences, &scores, labels.as_deref(), strategy, budget, seed, threshold),
        Command::FitThreshold { scores, labels } => fit(&scores, &labels),
        Command::Run { config, out } => run(&config, &out),
        Command::Report { input, out } => report(&input, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
