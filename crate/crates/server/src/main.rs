use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use anyhow::Context;
use clap::Parser;
use dqs_server::{load_pool, router, EventLog, Service};

/// Serves a labelling session over HTTP.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// Candidate sequences (JSONL).
    #[arg(long)]
    sequences: PathBuf,
    /// Anomaly scores for the candidates (JSONL).
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, default_value = "default")]
    session: String,
    /// Seeds the random parts of each round.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Directory holding `<session>.events.jsonl`.
    #[arg(long, default_value = ".")]
    log_dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    if args.session.is_empty() || !args.session.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        anyhow::bail!("session id must be non-empty and use only letters, digits, '-' and '_'");
    }
    let pool = load_pool(&args.sequences, &args.scores).context("loading candidate pool")?;
    std::fs::create_dir_all(&args.log_dir)
        .with_context(|| format!("creating {}", args.log_dir.display()))?;
    let log_path = EventLog::path_for(&args.log_dir, &args.session);
    let service = Service::open(&args.session, args.seed, pool, &log_path)?;
    log::info!(
        "session `{}`: {} candidates, log {}",
        args.session,
        service.session().query_state().candidates().len(),
        log_path.display()
    );
    let app = router(Arc::new(Mutex::new(service)));
    let listener = tokio::net::TcpListener::bind(args.addr)
        .await
        .with_context(|| format!("binding {}", args.addr))?;
    log::info!("listening on http://{}", args.addr);
    axum::serve(listener, app).await?;
    Ok(())
}
