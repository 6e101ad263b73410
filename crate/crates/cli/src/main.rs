//! Command-line front end: simulate markets, infer values from auction logs,
//! run the rate study and export plot-ready files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gsp_regret::geometry::run_rate_study;
use gsp_regret::market::simulate_market;
use gsp_regret::pipeline::{
    export, infer_account, ingest, read_artifacts, simulation_setup, write_artifacts, write_log, write_rate_study,
    AccountArtifacts, Config, PipelineError,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "gsp-regret", version, about = "Value inference for repeated GSP auctions")]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shared {
    /// TOML config file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for simulation and the rate study.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-listing and per-replication work.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Spacing of the deviation bid grid.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    /// Regret cap bounding the rationalizable set; required for inference.
    #[arg(long, global = true)]
    epsilon_max: Option<f64>,
    /// Bisection precision for the multiplicative error.
    #[arg(long, global = true)]
    precision: Option<f64>,
    /// Output file (simulate) or directory (all other commands).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate learners and write the auction log as JSONL.
    Simulate,
    /// Infer every listing in a log and write artifacts.json.
    Infer {
        log: PathBuf,
        #[arg(long, default_value = "jsonl")]
        format: String,
    },
    /// Infer every listing in a log and write predictions and summary files.
    Predict {
        log: PathBuf,
        #[arg(long, default_value = "jsonl")]
        format: String,
    },
    /// Run the Hausdorff rate study and write its table and fitted slope.
    RateStudy,
    /// Write plot-ready files from a saved artifacts.json.
    Export { artifacts: PathBuf },
}

fn load_config(shared: &Shared) -> Result<Config, PipelineError> {
    let mut config = match &shared.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = shared.seed {
        config.seed = seed;
    }
    if let Some(jobs) = shared.jobs {
        config.jobs = Some(jobs);
    }
    if let Some(step) = shared.grid_step {
        config.grid_step = step;
    }
    if let Some(eps) = shared.epsilon_max {
        config.epsilon_max = Some(eps);
    }
    if let Some(precision) = shared.precision {
        config.precision = precision;
    }
    Ok(config)
}

fn out_dir(shared: &Shared) -> PathBuf {
    shared.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn infer_log(config: &Config, log: &Path, format: &str) -> Result<AccountArtifacts, PipelineError> {
    let settings = config.inference()?;
    let histories = ingest(log, format, config.batch_window)?;
    log::info!("ingested {} listings from {}", histories.len(), log.display());
    Ok(infer_account(&histories, &settings))
}

/// Per-listing failures do not stop the run but are reported as errors.
fn listing_errors(artifacts: &AccountArtifacts) -> Vec<serde_json::Value> {
    artifacts
        .failures
        .iter()
        .map(|f| json!({ "listing_id": f.listing_id, "error": f.error }))
        .collect()
}

fn run(cli: &Cli) -> Result<Vec<serde_json::Value>, PipelineError> {
    let config = load_config(&cli.shared)?;
    if let Some(jobs) = config.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| PipelineError::Config(format!("jobs: {e}")))?;
    }
    match &cli.command {
        Command::Simulate => {
            let (spec, bidders) = simulation_setup(&config)?;
            let histories = simulate_market(&spec, &bidders, config.periods, config.auctions_per_period, config.seed)?;
            let path = cli.shared.out.clone().unwrap_or_else(|| PathBuf::from("auctions.jsonl"));
            let file = File::create(&path).map_err(|e| io_error(&path, e))?;
            let mut out = BufWriter::new(file);
            write_log(&mut out, &histories)?;
            out.flush().map_err(|e| io_error(&path, e))?;
            log::info!("wrote {} listings to {}", histories.len(), path.display());
            Ok(Vec::new())
        }
        Command::Infer { log, format } => {
            let artifacts = infer_log(&config, log, format)?;
            let dir = out_dir(&cli.shared);
            std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
            write_artifacts(&dir.join("artifacts.json"), &artifacts)?;
            Ok(listing_errors(&artifacts))
        }
        Command::Predict { log, format } => {
            let artifacts = infer_log(&config, log, format)?;
            export(&artifacts, &out_dir(&cli.shared))?;
            Ok(listing_errors(&artifacts))
        }
        Command::RateStudy => {
            let report = run_rate_study(&config.rate_study()?)?;
            write_rate_study(&report, &out_dir(&cli.shared))?;
            log::info!("slope {:.4} (stderr {:.4})", report.slope, report.slope_stderr);
            Ok(Vec::new())
        }
        Command::Export { artifacts } => {
            let artifacts = read_artifacts(artifacts)?;
            export(&artifacts, &out_dir(&cli.shared))?;
            Ok(listing_errors(&artifacts))
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let errors = match run(&cli) {
        Ok(errors) => errors,
        Err(e) => vec![json!({ "error": e.to_string() })],
    };
    if errors.is_empty() {
        return ExitCode::SUCCESS;
    }
    eprintln!("{}", json!({ "errors": errors }));
    ExitCode::FAILURE
}
