//! Estimators that turn ensembles into verdicts: distance to normality and
//! its decay in `L`, exact sampling of the limit process, finite-dimensional
//! two-sample comparison and increment moments.

mod decay;
mod distance;
mod fdd;
mod limit;
mod moments;

pub use decay::{fit_decay_exponent, loglog_fit, DecayFit, LogLogFit};
pub use distance::{ks_distance, standardize, tv_histogram, DistanceEstimate, DistanceKind, Standardized};
pub use fdd::{energy_test, fdd_compare, CovarianceDiscrepancy, EnergyTest, FddReport, DEFAULT_PERMUTATIONS};
pub use limit::{limit_covariance_matrix, sample_limit_process, FactorDiagnostics, LimitProcessSample};
pub use moments::{increment_moment, MomentEstimate};

/// Sample mean and unbiased variance.
pub(crate) fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
