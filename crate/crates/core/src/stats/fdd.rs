//! Two-sample comparison of finite-dimensional distributions: entrywise
//! covariance discrepancies and an energy-distance permutation test.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::rng::stream;

pub const DEFAULT_PERMUTATIONS: usize = 500;
const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceDiscrepancy {
    pub i: usize,
    pub j: usize,
    pub first: f64,
    pub second: f64,
    /// `sqrt(se_first^2 + se_second^2)`
    pub pooled_se: f64,
    /// `(first - second) / pooled_se`
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyTest {
    pub statistic: f64,
    pub p_value: f64,
    pub permutations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FddReport {
    pub dim: usize,
    pub n_first: usize,
    pub n_second: usize,
    /// Upper triangle including the diagonal.
    pub covariance: Vec<CovarianceDiscrepancy>,
    pub max_abs_z: f64,
    pub energy: EnergyTest,
}

fn covariance_with_se(x: &[Vec<f64>], i: usize, j: usize) -> (f64, f64) {
    let n = x.len() as f64;
    let mi = x.iter().map(|r| r[i]).sum::<f64>() / n;
    let mj = x.iter().map(|r| r[j]).sum::<f64>() / n;
    let prods: Vec<f64> = x.iter().map(|r| (r[i] - mi) * (r[j] - mj)).collect();
    let (c, v) = super::mean_var(&prods);
    (c, (v / n).sqrt())
}

/// Compares two samples of `m`-vectors (rows).
pub fn fdd_compare(first: &[Vec<f64>], second: &[Vec<f64>], permutations: usize, seed: u64) -> Result<FddReport> {
    if first.len() < MIN_SAMPLES || second.len() < MIN_SAMPLES {
        return Err(config(format!(
            "fdd comparison needs at least {MIN_SAMPLES} vectors per sample ({} and {})",
            first.len(),
            second.len()
        )));
    }
    let dim = first[0].len();
    if dim == 0 || first.iter().chain(second).any(|r| r.len() != dim) {
        return Err(config("samples have mismatched dimensions"));
    }
    let mut covariance = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            let (a, sa) = covariance_with_se(first, i, j);
            let (b, sb) = covariance_with_se(second, i, j);
            let pooled_se = (sa * sa + sb * sb).sqrt();
            covariance.push(CovarianceDiscrepancy {
                i,
                j,
                first: a,
                second: b,
                pooled_se,
                z: (a - b) / pooled_se,
            });
        }
    }
    let max_abs_z = covariance.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
    let energy = energy_test(first, second, permutations, seed)?;
    Ok(FddReport {
        dim,
        n_first: first.len(),
        n_second: second.len(),
        covariance,
        max_abs_z,
        energy,
    })
}

/// Energy distance `2 E|X - Y| - E|X - X'| - E|Y - Y'|` (within-sample
/// means over distinct pairs) with a permutation p-value
/// `(1 + #{perm >= observed}) / (1 + permutations)`. Permutation `p` shuffles
/// with stream `p` of `seed`.
pub fn energy_test(first: &[Vec<f64>], second: &[Vec<f64>], permutations: usize, seed: u64) -> Result<EnergyTest> {
    let (n1, n2) = (first.len(), second.len());
    if n1 < 2 || n2 < 2 {
        return Err(config("energy distance needs at least two points per sample"));
    }
    let dim = first[0].len();
    if first.iter().chain(second).any(|r| r.len() != dim) {
        return Err(config("samples have mismatched dimensions"));
    }
    let pooled: Vec<&Vec<f64>> = first.iter().chain(second).collect();
    let engine: Box<dyn PairSums + Sync> = if dim == 1 {
        Box::new(SortedLine::new(pooled.iter().map(|r| r[0]).collect()))
    } else {
        Box::new(Euclidean::new(&pooled, dim))
    };
    let n = n1 + n2;
    let observed_labels: Vec<bool> = (0..n).map(|i| i < n1).collect();
    let observed = statistic(engine.within_sums(&observed_labels), engine.total(), n1, n2);
    let exceed: usize = (0..permutations)
        .into_par_iter()
        .map(|p| {
            let mut labels = observed_labels.clone();
            labels.shuffle(&mut stream(seed, p as u64));
            let s = statistic(engine.within_sums(&labels), engine.total(), n1, n2);
            usize::from(s >= observed)
        })
        .sum();
    Ok(EnergyTest {
        statistic: observed,
        p_value: (1 + exceed) as f64 / (1 + permutations) as f64,
        permutations,
    })
}

fn statistic((w1, w2): (f64, f64), total: f64, n1: usize, n2: usize) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    let cross = total - w1 - w2;
    2.0 * cross / (a * b) - 2.0 * w1 / (a * (a - 1.0)) - 2.0 * w2 / (b * (b - 1.0))
}

/// Sums of pairwise distances over unordered pairs.
trait PairSums {
    fn total(&self) -> f64;
    /// Within-group sums for the points labelled `true` and `false`.
    fn within_sums(&self, labels: &[bool]) -> (f64, f64);
}

/// Points on the line: after one sort, group sums follow from ranks.
struct SortedLine {
    order: Vec<usize>,
    sorted: Vec<f64>,
    total: f64,
}

impl SortedLine {
    fn new(values: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let n = sorted.len() as f64;
        let total = sorted
            .iter()
            .enumerate()
            .map(|(k, v)| v * (2.0 * k as f64 + 1.0 - n))
            .sum();
        SortedLine { order, sorted, total }
    }
}

impl PairSums for SortedLine {
    fn total(&self) -> f64 {
        self.total
    }

    fn within_sums(&self, labels: &[bool]) -> (f64, f64) {
        let n_true = labels.iter().filter(|&&l| l).count() as f64;
        let n_false = labels.len() as f64 - n_true;
        let (mut seen_true, mut seen_false) = (0.0, 0.0);
        let (mut w_true, mut w_false) = (0.0, 0.0);
        // the c-th smallest of k values enters sum_{a<b} (v_b - v_a) with weight 2c - 1 - k
        for (&idx, &v) in self.order.iter().zip(&self.sorted) {
            if labels[idx] {
                w_true += v * (2.0 * seen_true + 1.0 - n_true);
                seen_true += 1.0;
            } else {
                w_false += v * (2.0 * seen_false + 1.0 - n_false);
                seen_false += 1.0;
            }
        }
        (w_true, w_false)
    }
}

/// Euclidean distances computed on the fly from coordinate columns.
struct Euclidean {
    coords: Vec<Vec<f64>>,
    row_sums: Vec<f64>,
    total: f64,
}

impl Euclidean {
    fn new(points: &[&Vec<f64>], dim: usize) -> Self {
        let coords: Vec<Vec<f64>> = (0..dim).map(|k| points.iter().map(|p| p[k]).collect()).collect();
        let n = points.len();
        let mut e = Euclidean {
            coords,
            row_sums: Vec::new(),
            total: 0.0,
        };
        let ones = vec![1.0; n];
        let row_sums: Vec<f64> = (0..n)
            .into_par_iter()
            .map_init(Vec::new, |scratch, i| e.row_dot(i, &ones, scratch, false))
            .collect();
        e.total = 0.5 * row_sums.iter().sum::<f64>();
        e.row_sums = row_sums;
        e
    }

    /// `sum_j d_ij w_j`, over all `j != i` or only `j > i`.
    fn row_dot(&self, i: usize, w: &[f64], scratch: &mut Vec<f64>, upper_only: bool) -> f64 {
        let n = w.len();
        let start = if upper_only { i + 1 } else { 0 };
        scratch.clear();
        scratch.resize(n - start, 0.0);
        for col in &self.coords {
            let xi = col[i];
            for (s, &c) in scratch.iter_mut().zip(&col[start..]) {
                let d = c - xi;
                *s += d * d;
            }
        }
        scratch.iter().zip(&w[start..]).map(|(s, wj)| s.sqrt() * wj).sum()
    }
}

impl PairSums for Euclidean {
    fn total(&self) -> f64 {
        self.total
    }

    fn within_sums(&self, labels: &[bool]) -> (f64, f64) {
        // with s = +-1: Q = sum_{i<j} d s_i s_j = W1 + W2 - B and
        // R = sum_i s_i rowsum_i = 2 (W1 - W2)
        let s: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
        let mut scratch = Vec::new();
        let q: f64 = (0..s.len())
            .map(|i| s[i] * self.row_dot(i, &s, &mut scratch, true))
            .sum();
        let r: f64 = s.iter().zip(&self.row_sums).map(|(a, b)| a * b).sum();
        let t = self.total;
        ((t + q + r) / 4.0, (t + q - r) / 4.0)
    }
}
