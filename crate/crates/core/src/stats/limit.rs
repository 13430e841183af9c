use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{limit_covariance, FSigma};
use crate::error::{domain, Error, Result};
use crate::params::ModelParams;
use crate::rng::{GaussianStream, NoiseSource};

/// Eigenvalues above `-CLIP_TOL` are clipped to zero; anything lower is a
/// factorization failure.
pub const CLIP_TOL: f64 = 1e-12;

const ROWS_PER_STREAM: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorDiagnostics {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Number of slightly negative eigenvalues set to zero.
    pub clipped: usize,
}

/// Exact draws of the limiting Gaussian process at fixed times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitProcessSample {
    pub times: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// `n x m` sample matrix.
    pub samples: Vec<Vec<f64>>,
    pub diagnostics: FactorDiagnostics,
}

/// Covariance matrix of the limit process at `times` (exactly symmetric).
pub fn limit_covariance_matrix(params: &ModelParams, fsigma: &FSigma, times: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
    let m = times.len();
    let mut c = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let v = limit_covariance(params, fsigma, times[i], times[j], tol)?;
            c[i][j] = v;
            c[j][i] = v;
        }
    }
    Ok(c)
}

/// Draws `n` vectors `(X_{t_1}, ..., X_{t_m})` of the limit process through
/// a symmetric eigen-factorization of its covariance.
pub fn sample_limit_process(
    params: &ModelParams,
    fsigma: &FSigma,
    times: &[f64],
    n: usize,
    seed: u64,
    tol: f64,
) -> Result<LimitProcessSample> {
    if times.is_empty() {
        return Err(domain("limit process needs at least one time"));
    }
    if let Some(t) = times.iter().find(|&&t| !(t > 0.0 && t <= params.horizon * (1.0 + 1e-12))) {
        return Err(domain(format!("time {t} outside (0, {}]", params.horizon)));
    }
    if n == 0 {
        return Err(domain("sample size must be positive"));
    }
    let m = times.len();
    let covariance = limit_covariance_matrix(params, fsigma, times, tol)?;
    let mat = DMatrix::from_fn(m, m, |i, j| covariance[i][j]);
    let eig = SymmetricEigen::new(mat);
    let min_eigenvalue = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_eigenvalue = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min_eigenvalue < -CLIP_TOL {
        return Err(Error::Factorization(format!(
            "covariance has eigenvalue {min_eigenvalue:e} below -{CLIP_TOL:e}"
        )));
    }
    let clipped = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
    // A = V diag(sqrt(lambda)), so A A^T = C
    let factor: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|k| eig.eigenvectors[(i, k)] * eig.eigenvalues[k].max(0.0).sqrt())
                .collect()
        })
        .collect();

    let blocks = n.div_ceil(ROWS_PER_STREAM);
    let samples: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut noise = GaussianStream::new(seed, b as u64);
            let rows = ROWS_PER_STREAM.min(n - b * ROWS_PER_STREAM);
            let mut z = vec![0.0; m];
            let factor = &factor;
            (0..rows)
                .map(move |r| {
                    noise.fill(r, &mut z);
                    factor
                        .iter()
                        .map(|row| row.iter().zip(&z).map(|(a, b)| a * b).sum())
                        .collect::<Vec<f64>>()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(LimitProcessSample {
        times: times.to_vec(),
        covariance,
        samples,
        diagnostics: FactorDiagnostics {
            min_eigenvalue,
            max_eigenvalue,
            clipped,
        },
    })
}
