use std::path::PathBuf;
use std::process::ExitCode;

use cable_core::harness::{emit_report, run_experiment, Experiment, ExperimentConfig, ReportFormat, OUT_DIR_ENV};
use cable_core::{Error, Result};
use clap::Parser;

/// Runs one verification experiment and prints a report.
///
/// Exit status: 0 all checks passed, 1 a statistical check failed,
/// 2 configuration or usage error, 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "cable-clt", version)]
struct Cli {
    /// kernel-check, chaos-eval, variance-scan, clt-scan, fclt-compare or increment-scan
    experiment: String,

    /// Flat TOML config; keys not given take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory (overrides the config).
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,

    /// Replicates per ensemble (overrides the config).
    #[arg(long)]
    reps: Option<usize>,

    /// Report printed to stdout.
    #[arg(long, default_value = "markdown-summary")]
    format: String,

    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: Cli) -> Result<i32> {
    let experiment: Experiment = cli.experiment.parse()?;
    let format: ReportFormat = cli.format.parse()?;
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = experiment;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = cli.reps {
        cfg.n_rep = reps;
    }
    if cli.out.is_some() {
        cfg.out_dir = cli.out;
    }
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Usage(format!("cannot start {threads} threads: {e}")))?;
    }
    let manifest = run_experiment(&cfg)?;
    println!("{}", emit_report(std::slice::from_ref(&manifest), format)?);
    if let Some(f) = &manifest.failure {
        let rep = f.replicate.map(|r| format!(" (replicate {r})")).unwrap_or_default();
        eprintln!("error in {}{rep}: {}", f.module, f.message);
    }
    Ok(manifest.exit_code())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("cable-clt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
