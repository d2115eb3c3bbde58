use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use dyncorr::ErrorKind;
use serde_json::json;

mod commands;
mod config;
mod expr;
mod output;

use commands::{Command, RunError};
use config::Config;

/// Exact simulations of two-time spin correlation measurements.
#[derive(Parser, Debug)]
#[command(name = "dyncorr", version)]
struct Cli {
    command: Command,
    /// `key = value` file, or the metadata JSON of an earlier run.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Overrides one key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// CSV destination; metadata goes next to it. Without it the CSV goes to stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
}

const THREADS_VAR: &str = "DYNCORR_THREADS";

fn resolve(cli: &Cli) -> Result<Config, config::ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for pair in &cli.set {
        cfg.set_pair(pair)?;
    }
    for (key, value) in [("n", &cli.n), ("seed", &cli.seed), ("lambda", &cli.lambda)] {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if let Some(out) = &cli.output {
        cfg.set("output", &out.to_string_lossy())?;
    }
    Ok(cfg)
}

fn threads() -> Result<Option<usize>, String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_VAR} must be a positive integer, got '{raw}'"))?;
    if n == 0 {
        return Err(format!("{THREADS_VAR} must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())?;
    Ok(Some(n))
}

fn exit_code(e: &RunError) -> u8 {
    match e {
        RunError::Config(_) => 1,
        RunError::Engine(e) => match e.kind() {
            ErrorKind::Input => 1,
            ErrorKind::Domain => 2,
            ErrorKind::Numerical => 3,
        },
        RunError::Check(_) => 3,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let threads = match threads() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    log::info!("running {} with {} threads", cli.command.name(), rayon::current_num_threads());
    let start = Instant::now();
    let outcome = match commands::run(cli.command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    if !cfg.is_set("output") {
        print!("{}", outcome.csv);
        return ExitCode::SUCCESS;
    }
    let metadata = json!({
        "command": cli.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "engine_version": dyncorr::VERSION,
        "config": cfg.values(),
        "seed": cfg.raw("seed"),
        "n": cfg.raw("n"),
        "threads": threads.unwrap_or_else(rayon::current_num_threads),
        "timings": { "compute_seconds": elapsed },
        "results": outcome.results,
    });
    let path = PathBuf::from(cfg.raw("output"));
    let text = serde_json::to_string_pretty(&metadata).expect("metadata serializes");
    if let Err(e) = output::write_pair(&path, &outcome.csv, &text) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
