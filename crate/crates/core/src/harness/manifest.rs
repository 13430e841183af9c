use serde::{Deserialize, Serialize};

use crate::error::Error;

/// One verified claim: a measured value against a reference, with the
/// uncertainty that decided it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Result the check addresses, e.g. "Theorem 2".
    pub claim: String,
    #[serde(with = "float17")]
    pub measured: f64,
    /// Monte Carlo standard error; 0 for deterministic quantities.
    #[serde(with = "float17")]
    pub std_error: f64,
    #[serde(with = "float17")]
    pub reference: f64,
    /// Allowed deviation (or margin) used for the verdict.
    #[serde(with = "float17")]
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    pub fn new(name: impl Into<String>, claim: &str) -> CheckBuilder {
        CheckBuilder(Check {
            name: name.into(),
            claim: claim.to_string(),
            measured: f64::NAN,
            std_error: 0.0,
            reference: f64::NAN,
            tolerance: 0.0,
            passed: false,
            note: String::new(),
        })
    }
}

pub struct CheckBuilder(Check);

impl CheckBuilder {
    pub fn measured(mut self, value: f64, std_error: f64) -> Self {
        self.0.measured = value;
        self.0.std_error = std_error;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.0.note = note.into();
        self
    }

    /// Passes when `|measured - reference| <= tolerance`.
    pub fn within(mut self, reference: f64, tolerance: f64) -> Check {
        self.0.reference = reference;
        self.0.tolerance = tolerance;
        self.0.passed = (self.0.measured - reference).abs() <= tolerance;
        self.0
    }

    /// Passes when `measured <= reference + tolerance`.
    pub fn at_most(mut self, reference: f64, tolerance: f64) -> Check {
        self.0.reference = reference;
        self.0.tolerance = tolerance;
        self.0.passed = self.0.measured <= reference + tolerance;
        self.0
    }

    /// Passes when `measured >= reference - tolerance`.
    pub fn at_least(mut self, reference: f64, tolerance: f64) -> Check {
        self.0.reference = reference;
        self.0.tolerance = tolerance;
        self.0.passed = self.0.measured >= reference - tolerance;
        self.0
    }
}

/// Where a run stopped on an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub module: String,
    pub replicate: Option<usize>,
    pub message: String,
    pub exit_code: i32,
}

impl Failure {
    pub fn new(module: &str, error: &Error) -> Self {
        let replicate = match error {
            Error::Replicate { index, .. } => Some(*index),
            _ => None,
        };
        Failure {
            module: module.to_string(),
            replicate,
            message: error.to_string(),
            exit_code: error.exit_code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub code_version: String,
    pub started: String,
    pub finished: String,
    pub seed: u64,
    pub n_rep: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub failure: Option<Failure>,
}

impl RunManifest {
    /// 0 when every check passed, 1 on a failed check, else the exit code of
    /// the recorded error.
    pub fn exit_code(&self) -> i32 {
        match &self.failure {
            Some(f) => f.exit_code,
            None if self.passed => 0,
            None => 1,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn code_version() -> String {
    format!("cable-core {}", env!("CARGO_PKG_VERSION"))
}

/// Seventeen significant digits, which round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// JSON numbers with 17 significant digits; non-finite values become `null`
/// and read back as NaN.
pub(crate) mod float17 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            let raw = RawValue::from_string(super::format_float(*x)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}
