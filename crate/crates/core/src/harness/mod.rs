//! Experiment configuration, execution and reporting.
//!
//! [`run_experiment`] validates an [`ExperimentConfig`], runs the named suite
//! and writes three files to the output directory:
//!
//! * `manifest.json`: the [`RunManifest`] (config hash, version, timestamps,
//!   one [`Check`] per verified claim);
//! * `samples.csv`: `experiment,L,t,replicate,value` rows of `F_L(t)`;
//! * `summary.csv`: the checks as a table.
//!
//! Floats in all three are written with 17 significant digits.

mod config;
mod experiments;
mod manifest;
mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub use config::{Experiment, ExperimentConfig, SigmaKind, OUT_DIR_ENV};
pub use experiments::{
    SampleRow, CLAIM_CHAOS_COEFFICIENTS, CLAIM_DECAY, CLAIM_FDD, CLAIM_F_SIGMA, CLAIM_INCREMENTS, CLAIM_KERNELS,
    CLAIM_LIMIT_INPUT, CLAIM_VARIANCE, SERIES_IDENTITY_TIMES, SERIES_IDENTITY_TOL,
};
pub use manifest::{code_version, format_float, Check, CheckBuilder, Failure, RunManifest};
pub use report::{emit_report, parse_csv_report, parse_json_report, ReportFormat};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

/// A finished run held in memory.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub samples: Vec<SampleRow>,
}

/// Runs the experiment without touching the file system. Configuration
/// errors are returned; errors during the computation are recorded in the
/// manifest's `failure` field.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let config_hash = cfg.hash()?;
    let started = now();
    let (checks, samples, failure) = match experiments::execute(cfg) {
        Ok(out) => (out.checks, out.samples, None),
        Err(staged) => (Vec::new(), Vec::new(), Some(Failure::new(staged.module, &staged.error))),
    };
    let passed = failure.is_none() && checks.iter().all(|c| c.passed);
    Ok(RunOutput {
        manifest: RunManifest {
            experiment: cfg.experiment.to_string(),
            config_hash,
            code_version: code_version(),
            started,
            finished: now(),
            seed: cfg.seed,
            n_rep: cfg.n_rep,
            passed,
            checks,
            failure,
        },
        samples,
    })
}

/// [`execute`], then writes `manifest.json`, `samples.csv` and `summary.csv`
/// to the resolved output directory. The process exit status for the run is
/// [`RunManifest::exit_code`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let dir = cfg.resolved_out_dir();
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
    let out = execute(cfg)?;
    write_samples(&dir.join(SAMPLES_FILE), &out.samples)?;
    let summary = report::csv_table(&report::check_rows(&out.manifest.experiment, &out.manifest.checks))?;
    std::fs::write(dir.join(SUMMARY_FILE), summary)?;
    let json = serde_json::to_string_pretty(&out.manifest).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(dir.join(MANIFEST_FILE), json + "\n")?;
    Ok(out.manifest)
}

pub fn write_samples(path: &Path, rows: &[SampleRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "experiment,L,t,replicate,value")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.experiment,
            format_float(r.length),
            format_float(r.t),
            r.replicate,
            format_float(r.value)
        )?;
    }
    w.flush()?;
    Ok(())
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
