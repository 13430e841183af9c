//! Moments of `F_L` increments.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::rng::stream;
use crate::solver::Ensemble;

const BOOTSTRAP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub t1: f64,
    pub t2: f64,
    pub k: u32,
    /// `E[|F_L(t2) - F_L(t1)|^k]^{1/k}`
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

fn moment_root(incr: &[f64], k: u32) -> f64 {
    let m = incr.iter().map(|d| d.abs().powi(k as i32)).sum::<f64>() / incr.len() as f64;
    m.powf(1.0 / k as f64)
}

/// Moment of the increment between two sampled times. The standard error
/// comes from a nonparametric bootstrap whose resamples use stream 0 of
/// `seed`.
pub fn increment_moment(ensemble: &Ensemble, t1: f64, t2: f64, k: u32, seed: u64) -> Result<MomentEstimate> {
    if !(k == 2 || k == 4) {
        return Err(config(format!("moment order must be 2 or 4, got {k}")));
    }
    if !(t1 < t2) {
        return Err(config(format!("need t1 < t2, got {t1} and {t2}")));
    }
    let a = ensemble.column(t1)?;
    let b = ensemble.column(t2)?;
    let incr: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y - x).collect();
    let n = incr.len();
    let value = moment_root(&incr, k);
    let mut rng = stream(seed, 0);
    let mut resample = vec![0.0; n];
    let boots: Vec<f64> = (0..BOOTSTRAP)
        .map(|_| {
            for r in resample.iter_mut() {
                *r = incr[rng.random_range(0..n)];
            }
            moment_root(&resample, k)
        })
        .collect();
    let (_, var) = super::mean_var(&boots);
    Ok(MomentEstimate {
        t1,
        t2,
        k,
        value,
        std_error: var.sqrt(),
        n,
    })
}
