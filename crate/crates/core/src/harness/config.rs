use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config, Error, Result};
use crate::params::{Boundary, ModelParams, NamedSigma, Sigma};
use crate::solver::MAX_STABILITY_RATIO;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CABLE_CLT_OUT_DIR";
const FALLBACK_OUT_DIR: &str = "cable-clt-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    KernelCheck,
    ChaosEval,
    VarianceScan,
    CltScan,
    FcltCompare,
    IncrementScan,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::KernelCheck,
        Experiment::ChaosEval,
        Experiment::VarianceScan,
        Experiment::CltScan,
        Experiment::FcltCompare,
        Experiment::IncrementScan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::KernelCheck => "kernel-check",
            Experiment::ChaosEval => "chaos-eval",
            Experiment::VarianceScan => "variance-scan",
            Experiment::CltScan => "clt-scan",
            Experiment::FcltCompare => "fclt-compare",
            Experiment::IncrementScan => "increment-scan",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown experiment '{s}'")))
    }
}

/// How `sigma` is chosen in a config file: `affine` uses `sigma1 u + sigma0`,
/// anything else names a bounded nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaKind {
    Affine,
    Sin,
    Tanh,
    SqrtOnePlusSquare,
}

/// One experiment run. Every key has a default, so a config file only needs
/// the keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,

    pub alpha: f64,
    pub beta: f64,
    pub domain_length: f64,
    pub horizon: f64,
    pub boundary: Boundary,
    pub sigma: SigmaKind,
    pub sigma1: f64,
    pub sigma0: f64,

    pub max_dx: f64,
    pub stability_ratio: f64,

    pub l_list: Vec<f64>,
    pub times: Vec<f64>,
    pub n_rep: usize,
    pub seed: u64,

    pub kernel_tol: f64,
    pub chaos_tol: f64,
    /// Random `(t, x, y)` points per boundary condition in kernel-check.
    pub n_points: usize,
    pub oracle_samples: usize,
    pub oracle_param_sets: usize,
    pub oracle_max_order: usize,
    pub bound_draws: usize,

    pub z_threshold: f64,
    pub p_threshold: f64,
    pub permutations: usize,
    pub decay_threshold: f64,
    /// Relative allowance `c / L` added to variance tolerances when the
    /// finite-`L` variance is not exact.
    pub finite_size_constant: f64,
    pub increment_base: f64,
    pub increment_steps: Vec<f64>,
    pub increment_fixed_step: f64,
    pub slope_tolerance: f64,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::KernelCheck,
            alpha: 0.0,
            beta: 1.0,
            domain_length: 64.0,
            horizon: 1.0,
            boundary: Boundary::Neumann,
            sigma: SigmaKind::Affine,
            sigma1: 1.0,
            sigma0: 0.0,
            max_dx: 0.1,
            stability_ratio: MAX_STABILITY_RATIO,
            l_list: vec![4.0, 16.0, 64.0, 256.0],
            times: vec![1.0],
            n_rep: 1000,
            seed: 1,
            kernel_tol: 1e-8,
            chaos_tol: 1e-10,
            n_points: 1000,
            oracle_samples: 1_000_000,
            oracle_param_sets: 5,
            oracle_max_order: 6,
            bound_draws: 1000,
            z_threshold: 3.0,
            p_threshold: 0.01,
            permutations: crate::stats::DEFAULT_PERMUTATIONS,
            decay_threshold: 0.35,
            finite_size_constant: 1.0,
            increment_base: 0.5,
            increment_steps: vec![0.05, 0.1, 0.2, 0.4],
            increment_fixed_step: 0.2,
            slope_tolerance: 0.1,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            ..Default::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config(format!("cannot serialize config: {e}")))
    }

    /// SHA-256 of the canonical serialization, excluding the output directory.
    pub fn hash(&self) -> Result<String> {
        let canonical = ExperimentConfig {
            out_dir: None,
            ..self.clone()
        }
        .to_toml()?;
        let digest = Sha256::digest(canonical.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn sigma(&self) -> Sigma {
        match self.sigma {
            SigmaKind::Affine => Sigma::affine(self.sigma1, self.sigma0),
            SigmaKind::Sin => Sigma::named(NamedSigma::Sin),
            SigmaKind::Tanh => Sigma::named(NamedSigma::Tanh),
            SigmaKind::SqrtOnePlusSquare => Sigma::named(NamedSigma::SqrtOnePlusSquare),
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(
            self.alpha,
            self.beta,
            self.domain_length,
            self.horizon,
            self.boundary,
            self.sigma(),
        )
        .map_err(as_config)
    }

    /// Output directory: the config value, else the environment variable,
    /// else `cable-clt-out` in the working directory.
    pub fn resolved_out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUT_DIR))
    }

    /// Checks every precondition of the selected experiment.
    pub fn validate(&self) -> Result<()> {
        let params = self.params()?;
        if !(self.max_dx > 0.0 && self.max_dx.is_finite()) {
            return Err(config(format!("max_dx must be positive, got {}", self.max_dx)));
        }
        if !(self.stability_ratio > 0.0 && self.stability_ratio <= MAX_STABILITY_RATIO) {
            return Err(config(format!(
                "stability_ratio must lie in (0, {MAX_STABILITY_RATIO}], got {}",
                self.stability_ratio
            )));
        }
        for (name, v) in [
            ("kernel_tol", self.kernel_tol),
            ("chaos_tol", self.chaos_tol),
            ("z_threshold", self.z_threshold),
            ("slope_tolerance", self.slope_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.p_threshold > 0.0 && self.p_threshold < 1.0) {
            return Err(config(format!("p_threshold must lie in (0, 1), got {}", self.p_threshold)));
        }
        if !(self.finite_size_constant >= 0.0 && self.finite_size_constant.is_finite()) {
            return Err(config("finite_size_constant must be nonnegative"));
        }
        let check_lengths = |min: usize| -> Result<()> {
            if self.l_list.len() < min {
                return Err(config(format!("l_list needs at least {min} entries")));
            }
            for &l in &self.l_list {
                params.with_length(l).map_err(as_config)?;
            }
            if self.l_list.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(config("l_list must be strictly increasing"));
            }
            Ok(())
        };
        let check_times = || -> Result<()> {
            if self.times.is_empty() {
                return Err(config("times must not be empty"));
            }
            if self.times.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(config("times must be strictly increasing"));
            }
            if self.times.iter().any(|&t| !(t > 0.0 && t <= self.horizon)) {
                return Err(config(format!("times must lie in (0, {}]", self.horizon)));
            }
            Ok(())
        };
        let check_reps = |min: usize| -> Result<()> {
            if self.n_rep < min {
                return Err(config(format!("{} needs n_rep >= {min}, got {}", self.experiment, self.n_rep)));
            }
            Ok(())
        };
        match self.experiment {
            Experiment::KernelCheck => {
                if self.n_points == 0 {
                    return Err(config("n_points must be positive"));
                }
            }
            Experiment::ChaosEval => {
                if self.sigma != SigmaKind::Affine {
                    return Err(config("chaos-eval needs an affine sigma"));
                }
                if self.oracle_samples < 1000 || self.oracle_param_sets == 0 || self.oracle_max_order == 0 {
                    return Err(config("chaos-eval needs oracle_samples >= 1000 and at least one parameter set and order"));
                }
            }
            Experiment::VarianceScan => {
                check_lengths(1)?;
                check_times()?;
                check_reps(100)?;
            }
            Experiment::CltScan => {
                check_lengths(3)?;
                check_times()?;
                check_reps(1000)?;
            }
            Experiment::FcltCompare => {
                check_times()?;
                check_reps(1000)?;
                if self.permutations == 0 {
                    return Err(config("permutations must be positive"));
                }
            }
            Experiment::IncrementScan => {
                check_lengths(2)?;
                check_reps(100)?;
                let mut steps = self.increment_steps.clone();
                steps.push(self.increment_fixed_step);
                if self.increment_steps.len() < 2 || self.increment_steps.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(config("increment_steps needs at least two increasing entries"));
                }
                if !(self.increment_base > 0.0) || steps.iter().any(|&d| !(d > 0.0)) {
                    return Err(config("increment_base and steps must be positive"));
                }
                if steps.iter().any(|&d| self.increment_base + d > self.horizon * (1.0 + 1e-12)) {
                    return Err(config("increment_base + step exceeds the horizon"));
                }
            }
        }
        Ok(())
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}
