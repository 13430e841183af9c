use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::manifest::{format_float, Check, Failure, RunManifest};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Json,
    Csv,
    MarkdownSummary,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown-summary" => Ok(ReportFormat::MarkdownSummary),
            other => Err(Error::Usage(format!(
                "unknown report format '{other}' (expected json, csv or markdown-summary)"
            ))),
        }
    }
}

const CSV_HEADER: [&str; 9] = [
    "experiment",
    "check",
    "claim",
    "measured",
    "std_error",
    "reference",
    "tolerance",
    "passed",
    "note",
];
const META_PREFIX: &str = "# manifest ";

/// Serializes completed manifests.
///
/// * `json`: an array of manifests.
/// * `csv`: one row per check; each manifest's remaining fields precede its
///   rows as a `# manifest {json}` comment line, so the document parses back
///   with [`parse_csv_report`].
/// * `markdown-summary`: one table per manifest naming the result each check
///   addresses.
pub fn emit_report(manifests: &[RunManifest], format: ReportFormat) -> Result<String> {
    if manifests.is_empty() {
        return Err(Error::Usage("no experiments to report".into()));
    }
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(manifests).map_err(|e| Error::Parse(format!("json: {e}")))
        }
        ReportFormat::Csv => emit_csv(manifests),
        ReportFormat::MarkdownSummary => Ok(emit_markdown(manifests)),
    }
}

pub fn parse_json_report(text: &str) -> Result<Vec<RunManifest>> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("json report: {e}")))
}

/// Fields of a manifest other than its checks.
#[derive(Serialize, Deserialize)]
struct Meta {
    experiment: String,
    config_hash: String,
    code_version: String,
    started: String,
    finished: String,
    seed: u64,
    n_rep: usize,
    passed: bool,
    failure: Option<Failure>,
}

pub(crate) fn check_rows(experiment: &str, checks: &[Check]) -> Vec<[String; 9]> {
    checks
        .iter()
        .map(|c| {
            [
                experiment.to_string(),
                c.name.clone(),
                c.claim.clone(),
                format_float(c.measured),
                format_float(c.std_error),
                format_float(c.reference),
                format_float(c.tolerance),
                c.passed.to_string(),
                c.note.replace(['\n', '\r'], " "),
            ]
        })
        .collect()
}

pub(crate) fn csv_table(rows: &[[String; 9]]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Parse(e.to_string()))?)
        .map_err(|e| Error::Parse(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

fn emit_csv(manifests: &[RunManifest]) -> Result<String> {
    let mut out = csv_table(&[])?;
    for m in manifests {
        let meta = Meta {
            experiment: m.experiment.clone(),
            config_hash: m.config_hash.clone(),
            code_version: m.code_version.clone(),
            started: m.started.clone(),
            finished: m.finished.clone(),
            seed: m.seed,
            n_rep: m.n_rep,
            passed: m.passed,
            failure: m.failure.clone(),
        };
        out.push_str(META_PREFIX);
        out.push_str(&serde_json::to_string(&meta).map_err(|e| Error::Parse(e.to_string()))?);
        out.push('\n');
        let body = csv_table(&check_rows(&m.experiment, &m.checks))?;
        // drop the repeated header
        out.push_str(body.split_once('\n').map_or("", |(_, rest)| rest));
    }
    Ok(out)
}

pub fn parse_csv_report(text: &str) -> Result<Vec<RunManifest>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty csv report".into()))?;
    if header.split(',').collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected csv header '{header}'")));
    }
    let mut manifests: Vec<RunManifest> = Vec::new();
    let parse_float = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Parse(format!("bad number '{s}'"))) };
    for line in lines {
        if let Some(meta) = line.strip_prefix(META_PREFIX) {
            let meta: Meta = serde_json::from_str(meta).map_err(|e| Error::Parse(format!("manifest line: {e}")))?;
            manifests.push(RunManifest {
                experiment: meta.experiment,
                config_hash: meta.config_hash,
                code_version: meta.code_version,
                started: meta.started,
                finished: meta.finished,
                seed: meta.seed,
                n_rep: meta.n_rep,
                passed: meta.passed,
                checks: Vec::new(),
                failure: meta.failure,
            });
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let current = manifests
            .last_mut()
            .ok_or_else(|| Error::Parse("check row before any manifest line".into()))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(line.as_bytes());
        let record = reader
            .records()
            .next()
            .ok_or_else(|| Error::Parse("empty row".into()))?
            .map_err(csv_err)?;
        if record.len() != CSV_HEADER.len() {
            return Err(Error::Parse(format!("row has {} fields", record.len())));
        }
        current.checks.push(Check {
            name: record[1].to_string(),
            claim: record[2].to_string(),
            measured: parse_float(&record[3])?,
            std_error: parse_float(&record[4])?,
            reference: parse_float(&record[5])?,
            tolerance: parse_float(&record[6])?,
            passed: record[7]
                .parse()
                .map_err(|_| Error::Parse(format!("bad flag '{}'", &record[7])))?,
            note: record[8].to_string(),
        });
    }
    Ok(manifests)
}

fn short(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_finite() && (1e-3..1e4).contains(&x.abs()) {
        format!("{x:.5}")
    } else {
        format!("{x:.4e}")
    }
}

fn emit_markdown(manifests: &[RunManifest]) -> String {
    let mut s = String::from("# Run summary\n");
    for m in manifests {
        let verdict = match (&m.failure, m.passed) {
            (Some(_), _) => "ERROR",
            (None, true) => "PASS",
            (None, false) => "FAIL",
        };
        let _ = writeln!(s, "\n## {}: {verdict}\n", m.experiment);
        let _ = writeln!(
            s,
            "Config `{}`, seed {}, {} replicates, {}.\n",
            &m.config_hash[..m.config_hash.len().min(12)],
            m.seed,
            m.n_rep,
            m.code_version
        );
        if let Some(f) = &m.failure {
            let rep = f.replicate.map(|r| format!(", replicate {r}")).unwrap_or_default();
            let _ = writeln!(s, "Stopped in `{}`{rep}: {}\n", f.module, f.message);
        }
        if m.checks.is_empty() {
            continue;
        }
        s.push_str("| Check | Claim | Measured | Std. error | Reference | Tolerance | Result |\n");
        s.push_str("|---|---|---|---|---|---|---|\n");
        for c in &m.checks {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} | {} |",
                c.name,
                c.claim,
                short(c.measured),
                short(c.std_error),
                short(c.reference),
                short(c.tolerance),
                if c.passed { "pass" } else { "FAIL" }
            );
        }
        let notes: Vec<&Check> = m.checks.iter().filter(|c| !c.note.is_empty()).collect();
        if !notes.is_empty() {
            s.push('\n');
            for c in notes {
                let _ = writeln!(s, "- {}: {}", c.name, c.note);
            }
        }
    }
    s
}
