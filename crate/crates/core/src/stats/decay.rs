use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Least-squares fit of `ln y = intercept + slope ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub residual_norm: f64,
}

pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(domain("log-log fit needs at least two matching points"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(domain("log-log fit needs positive finite values"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("log-log fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_se = if lx.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(LogLogFit {
        slope,
        intercept,
        slope_se,
        residual_norm: rss.sqrt(),
    })
}

/// Fitted power-law decay `distance ~ c L^{-exponent}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub l_values: Vec<f64>,
    pub distances: Vec<f64>,
    /// Decay exponent (negated log-log slope).
    pub exponent: f64,
    pub exponent_se: f64,
    /// `ln c`
    pub intercept: f64,
    pub residual_norm: f64,
}

/// Fits `ln d = ln c - exponent ln L` over `(L, d)` pairs.
pub fn fit_decay_exponent(pairs: &[(f64, f64)]) -> Result<DecayFit> {
    let mut distinct: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(domain("decay fit needs at least three distinct L values"));
    }
    if let Some(p) = pairs.iter().find(|p| !(p.1 > 0.0)) {
        return Err(domain(format!("nonpositive distance {} at L = {}", p.1, p.0)));
    }
    let l: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let d: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let fit = loglog_fit(&l, &d)?;
    Ok(DecayFit {
        l_values: l,
        distances: d,
        exponent: -fit.slope,
        exponent_se: fit.slope_se,
        intercept: fit.intercept,
        residual_norm: fit.residual_norm,
    })
}
