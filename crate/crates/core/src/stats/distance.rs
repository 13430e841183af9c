use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{normal_cdf, normal_quantile};

const MIN_KS: usize = 100;
const MIN_TV: usize = 1000;
const MIN_BINS: usize = 10;

/// Centred, unit-variance samples together with the variance they were
/// scaled by.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    pub values: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// Jackknife standard error of `variance`.
    pub variance_se: f64,
}

/// Subtracts the sample mean and divides by the sample standard deviation.
pub fn standardize(samples: &[f64]) -> Result<Standardized> {
    let n = samples.len();
    if n < MIN_KS {
        return Err(domain(format!("standardize needs at least {MIN_KS} samples, got {n}")));
    }
    let (mean, variance) = super::mean_var(samples);
    if !(variance > 0.0) {
        return Err(Error::Degenerate("sample variance is zero".into()));
    }
    let sd = variance.sqrt();
    let values = samples.iter().map(|x| (x - mean) / sd).collect();

    let nf = n as f64;
    let ss = variance * (nf - 1.0);
    let loo: Vec<f64> = samples
        .iter()
        .map(|x| (ss - (x - mean).powi(2) * nf / (nf - 1.0)) / (nf - 2.0))
        .collect();
    let loo_mean = loo.iter().sum::<f64>() / nf;
    let variance_se = ((nf - 1.0) / nf * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>()).sqrt();
    Ok(Standardized {
        values,
        mean,
        variance,
        variance_se,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceKind {
    KolmogorovSmirnov,
    HistogramTV,
}

/// Distance between an empirical law and `N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub kind: DistanceKind,
    pub value: f64,
    pub n: usize,
    pub bins: Option<usize>,
    /// For the binned estimate: `1 / bins`, the most by which the
    /// Kolmogorov distance of the same sample can exceed `value`.
    pub binning_slack: f64,
}

/// `sup_x |F_n(x) - Phi(x)|`.
pub fn ks_distance(samples: &[f64]) -> Result<DistanceEstimate> {
    let n = samples.len();
    if n < MIN_KS {
        return Err(domain(format!("KS distance needs at least {MIN_KS} samples, got {n}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let value = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let phi = normal_cdf(x);
            ((i + 1) as f64 / nf - phi).max(phi - i as f64 / nf)
        })
        .fold(0.0, f64::max);
    Ok(DistanceEstimate {
        kind: DistanceKind::KolmogorovSmirnov,
        value,
        n,
        bins: None,
        binning_slack: 0.0,
    })
}

/// Plug-in total variation over `bins` equal-probability normal bins;
/// `None` selects `ceil(n^{1/3})`.
pub fn tv_histogram(samples: &[f64], bins: Option<usize>) -> Result<DistanceEstimate> {
    let n = samples.len();
    if n < MIN_TV {
        return Err(domain(format!("binned TV needs at least {MIN_TV} samples, got {n}")));
    }
    let bins = bins.unwrap_or_else(|| (n as f64).cbrt().ceil() as usize);
    if bins < MIN_BINS {
        return Err(domain(format!("binned TV needs at least {MIN_BINS} bins, got {bins}")));
    }
    let edges: Vec<f64> = (1..bins).map(|b| normal_quantile(b as f64 / bins as f64)).collect();
    let mut counts = vec![0usize; bins];
    for &x in samples {
        counts[edges.partition_point(|&e| e <= x)] += 1;
    }
    let p = 1.0 / bins as f64;
    let value = 0.5 * counts.iter().map(|&c| (c as f64 / n as f64 - p).abs()).sum::<f64>();
    Ok(DistanceEstimate {
        kind: DistanceKind::HistogramTV,
        value,
        n,
        bins: Some(bins),
        binning_slack: p,
    })
}
