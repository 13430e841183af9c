//! Chaos-expansion coefficients of the second moment for affine noise
//! `sigma(u) = sigma1 u + sigma0`, the limit `f_sigma(t)` of the spatially
//! averaged `E[sigma(u(t, x))^2]`, and the covariance of the limiting
//! Gaussian process.
//!
//! The k-th coefficient is an integral over the ordered simplex
//! `0 < r_k < ... < r_1 < t` of a product of `p_{2 beta tau}(0)` factors over
//! the `k` gaps `tau`. The gaps sum to `u = t - r_k`, and the Dirichlet
//! integral of `prod tau_i^{-1/2}` over that slice is
//! `Gamma(1/2)^k / Gamma(k/2) u^{k/2 - 1}`, which leaves
//!
//! ```text
//! f_k(t) = sigma1^{2(k-1)} e^{-2 alpha t} (4 beta)^{-k/2} / Gamma(k/2)
//!          * int_0^t u^{k/2-1} (sigma1 + sigma0 e^{alpha (t-u)})^2 du
//! ```
//!
//! evaluated after the substitution `u = v^2`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::params::ModelParams;
use crate::quadrature::integrate_adaptive;
use crate::rng::stream;
use crate::special::{ln_gamma, normal_cdf};

/// Hard cap on the chaos order used by [`f_sigma`].
pub const MAX_ORDER: usize = 200;

/// Truncated chaos series at a fixed time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosCoefficients {
    pub t: f64,
    pub k_max: usize,
    /// `f_0(t), ..., f_{k_max}(t)`.
    pub values: Vec<f64>,
    /// Bound on `sum_{k > k_max} sigma1^2 f_k(t)`.
    pub tail_bound: f64,
    pub f_sigma: f64,
    /// `e^{-2 alpha t} (|s1| + e^{|alpha| t} |s0|)^2 (f(s1^4 t / beta) - 1) + (s1 e^{-alpha t} + s0)^2`
    pub upper_bound: f64,
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Source of `f_sigma` for the limiting covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FSigma {
    /// Exact chaos series for `sigma(u) = sigma1 u + sigma0`.
    Affine { sigma1: f64, sigma0: f64 },
    /// Piecewise-linear interpolation of `(time, value)` pairs, held
    /// constant outside the tabulated range.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl FSigma {
    pub fn from_params(params: &ModelParams) -> Result<Self> {
        let (sigma1, sigma0) = affine(params)?;
        Ok(FSigma::Affine { sigma1, sigma0 })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(domain("tabulated f_sigma needs matching, non-empty time and value lists"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(domain("tabulated f_sigma times must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(domain("tabulated f_sigma values must be finite and nonnegative"));
        }
        Ok(FSigma::Tabulated { times, values })
    }

    /// `f_sigma(s)`; at `s = 0` the affine series reduces to `(sigma1 + sigma0)^2`.
    pub fn eval(&self, params: &ModelParams, s: f64, tol: f64) -> Result<f64> {
        match self {
            FSigma::Affine { sigma1, sigma0 } => {
                if s <= 0.0 {
                    return Ok((sigma1 + sigma0).powi(2));
                }
                Ok(f_sigma_affine(params.alpha, params.beta, *sigma1, *sigma0, s, tol)?.f_sigma)
            }
            FSigma::Tabulated { times, values } => {
                let i = times.partition_point(|&x| x <= s);
                Ok(if i == 0 {
                    values[0]
                } else if i == times.len() {
                    values[i - 1]
                } else {
                    let w = (s - times[i - 1]) / (times[i] - times[i - 1]);
                    values[i - 1] * (1.0 - w) + values[i] * w
                })
            }
        }
    }
}

fn affine(params: &ModelParams) -> Result<(f64, f64)> {
    params
        .sigma
        .as_affine()
        .ok_or_else(|| Error::Unsupported("chaos coefficients need an affine sigma".into()))
}

/// `f_k(t)` from the one-dimensional reduction of the simplex integral.
pub fn f_k_closed(params: &ModelParams, k: usize, t: f64) -> Result<f64> {
    let (s1, s0) = affine(params)?;
    f_k_affine(params.alpha, params.beta, s1, s0, k, t)
}

fn f_k_affine(alpha: f64, beta: f64, s1: f64, s0: f64, k: usize, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain(format!("f_k needs t > 0, got {t}")));
    }
    if k == 0 {
        return Ok((-2.0 * alpha * t).exp());
    }
    let prefactor = s1.powi(2 * (k as i32 - 1));
    if prefactor == 0.0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    // u = v^2: u^{k/2-1} du = 2 v^{k-1} dv
    let weight = |v: f64| {
        let u = v * v;
        let h = s1 + s0 * (alpha * (t - u)).exp();
        2.0 * v.powi(k as i32 - 1) * h * h
    };
    let integral = integrate_adaptive(weight, 0.0, t.sqrt(), 1e-300, 1e-14)?.value;
    let log_norm = -2.0 * alpha * t - 0.5 * kf * (4.0 * beta).ln() - ln_gamma(0.5 * kf);
    Ok(prefactor * log_norm.exp() * integral)
}

/// Direct Monte Carlo evaluation of the simplex integral defining `f_k(t)`.
///
/// Ordered times are drawn as sorted uniforms on `[0, t]`. Samples are
/// generated in fixed-size blocks, each on its own counter-based stream, so
/// the estimate depends only on `(seed, n_samples)`.
pub fn f_k_oracle(params: &ModelParams, k: usize, t: f64, n_samples: usize, seed: u64) -> Result<Estimate> {
    const BLOCK: usize = 1 << 14;
    let (s1, s0) = affine(params)?;
    if k == 0 {
        return Err(domain("the oracle covers k >= 1"));
    }
    if !(t > 0.0) || n_samples == 0 {
        return Err(domain(format!("oracle needs t > 0 and n > 0 (t = {t}, n = {n_samples})")));
    }
    let (alpha, beta) = (params.alpha, params.beta);
    let ln_fact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    let scale = s1.powi(2 * (k as i32 - 1)) * (-2.0 * alpha * t + k as f64 * t.ln() - ln_fact).exp();
    let kernel_norm = 1.0 / (4.0 * std::f64::consts::PI * beta).sqrt();

    let blocks = n_samples.div_ceil(BLOCK);
    let partial: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng: ChaCha8Rng = stream(seed, b as u64);
            let count = BLOCK.min(n_samples - b * BLOCK);
            let mut r = vec![0.0; k];
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                for ri in r.iter_mut() {
                    *ri = t * rng.random::<f64>();
                }
                r.sort_unstable_by(|a, b| b.total_cmp(a));
                let mut prod = 1.0;
                let mut upper = t;
                for &ri in &r {
                    prod *= kernel_norm / (upper - ri).sqrt();
                    upper = ri;
                }
                let h = s1 + s0 * (alpha * r[k - 1]).exp();
                let v = scale * prod * h * h;
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partial
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let n = n_samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0).max(1.0)).max(0.0);
    Ok(Estimate {
        mean,
        std_error: (var / n).sqrt(),
        n: n_samples,
    })
}

/// `f(t) = 2 e^{t/4} Phi(sqrt(t/2))`.
pub fn chen_f(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(domain(format!("f(t) needs t >= 0, got {t}")));
    }
    Ok(2.0 * (0.25 * t).exp() * normal_cdf((0.5 * t).sqrt()))
}

/// Upper bound on `f_sigma(t)` in terms of [`chen_f`].
pub fn f_sigma_upper_bound(alpha: f64, beta: f64, s1: f64, s0: f64, t: f64) -> Result<f64> {
    let a = (-2.0 * alpha * t).exp() * (s1.abs() + (alpha.abs() * t).exp() * s0.abs()).powi(2);
    let f = chen_f(s1.powi(4) * t / beta)?;
    Ok(a * (f - 1.0) + (s1 * (-alpha * t).exp() + s0).powi(2))
}

/// `f_sigma(t) = sigma1^2 sum_k f_k(t) + 2 sigma1 sigma0 e^{-alpha t} + sigma0^2`,
/// truncated once the bound on the remaining terms drops below `tol`.
pub fn f_sigma(params: &ModelParams, t: f64, tol: f64) -> Result<ChaosCoefficients> {
    let (s1, s0) = affine(params)?;
    f_sigma_affine(params.alpha, params.beta, s1, s0, t, tol)
}

fn f_sigma_affine(alpha: f64, beta: f64, s1: f64, s0: f64, t: f64, tol: f64) -> Result<ChaosCoefficients> {
    if !(t > 0.0) {
        return Err(domain(format!("f_sigma needs t > 0, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    // sigma1^2 f_k(t) <= amp * x^{k/2} / Gamma(k/2 + 1)
    let amp = (-2.0 * alpha * t).exp() * (s1.abs() + (alpha.abs() * t).exp() * s0.abs()).powi(2);
    let x = s1.powi(4) * t / (4.0 * beta);
    let term_bound = |k: usize| {
        if x == 0.0 {
            return 0.0;
        }
        let kf = k as f64;
        amp * (0.5 * kf * x.ln() - ln_gamma(0.5 * kf + 1.0)).exp()
    };
    let tail_after = |k_max: usize| {
        let k = k_max + 1;
        let b = term_bound(k);
        if b == 0.0 {
            return 0.0;
        }
        let kf = k as f64;
        let ratio = x.sqrt() * (ln_gamma(0.5 * kf + 1.0) - ln_gamma(0.5 * kf + 1.5)).exp();
        if ratio >= 1.0 {
            f64::INFINITY
        } else {
            b / (1.0 - ratio)
        }
    };

    let mut values = vec![(-2.0 * alpha * t).exp()];
    let mut k_max = 0;
    let mut tail = tail_after(0);
    while tail > tol {
        if k_max >= MAX_ORDER {
            return Err(Error::Truncation {
                achieved: tail,
                requested: tol,
                terms: k_max,
            });
        }
        k_max += 1;
        values.push(f_k_affine(alpha, beta, s1, s0, k_max, t)?);
        tail = tail_after(k_max);
    }
    let series: f64 = values.iter().sum();
    let f_sigma = s1 * s1 * series + 2.0 * s1 * s0 * (-alpha * t).exp() + s0 * s0;
    let upper_bound = f_sigma_upper_bound(alpha, beta, s1, s0, t)?;
    debug_assert!(f_sigma <= upper_bound + tol + 1e-12 * upper_bound.abs());
    Ok(ChaosCoefficients {
        t,
        k_max,
        values,
        tail_bound: tail,
        f_sigma,
        upper_bound,
    })
}

/// Limiting covariance `int_0^{t1 ^ t2} e^{-alpha (t1 + t2 - 2s)} f_sigma(s) ds`.
pub fn limit_covariance(params: &ModelParams, fsigma: &FSigma, t1: f64, t2: f64, tol: f64) -> Result<f64> {
    if !(t1 >= 0.0 && t2 >= 0.0) {
        return Err(domain(format!("covariance times must be nonnegative ({t1}, {t2})")));
    }
    if t1.max(t2) > params.horizon * (1.0 + 1e-12) {
        return Err(domain(format!("covariance times beyond horizon {}", params.horizon)));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let m = t1.min(t2);
    if m == 0.0 {
        return Ok(0.0);
    }
    let alpha = params.alpha;
    let inner_tol = tol * 0.1 / (m * (alpha.abs() * (t1 + t2)).exp()).max(1.0);
    let mut failure = None;
    // s = v^2 removes the sqrt(s) behaviour of f_sigma near 0
    let integrand = |v: f64| {
        let s = v * v;
        match fsigma.eval(params, s, inner_tol) {
            Ok(f) => 2.0 * v * (-alpha * (t1 + t2 - 2.0 * s)).exp() * f,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let r = integrate_adaptive(integrand, 0.0, m.sqrt(), 0.5 * tol, 0.0)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}
