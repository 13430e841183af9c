//! Explicit finite-difference simulation of the stochastic cable equation
//! and reproducible Monte Carlo ensembles of its spatial average.
//!
//! Cells are centred at `x_i = (i + 1/2) dx`. One Euler–Maruyama step reads
//!
//! ```text
//! u_i <- u_i + dt [ (beta/2) (u_{i+1} - 2 u_i + u_{i-1}) / dx^2 - alpha u_i ]
//!            + sigma(u_i) xi_i sqrt(dt / dx)
//! ```
//!
//! with ghost cells `u_{-1} = u_0` (Neumann), `u_{-1} = -u_0` (Dirichlet, zero
//! on the wall) or index wraparound (periodic).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::kernels::green_mass;
use crate::params::{Boundary, ModelParams, Sigma};
use crate::rng::{GaussianStream, NoiseSource};

/// Largest admissible `beta dt / dx^2`.
pub const MAX_STABILITY_RATIO: f64 = 0.25;
/// A path is abandoned once `max |u|` exceeds this value.
pub const BLOWUP_LIMIT: f64 = 1e6;
/// Tolerance of the mean-field values used to centre the spatial average.
pub const CENTERING_TOL: f64 = 1e-12;

/// Uniform space-time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_space: usize,
    pub dx: f64,
    pub n_time: usize,
    pub dt: f64,
    /// `beta dt / dx^2`
    pub stability_ratio: f64,
}

impl Grid {
    pub fn new(params: &ModelParams, n_space: usize, n_time: usize) -> Result<Self> {
        params.validate()?;
        if n_space < 8 {
            return Err(config(format!("need at least 8 cells, got {n_space}")));
        }
        if n_time == 0 {
            return Err(config("need at least one time step"));
        }
        let dx = params.domain_length / n_space as f64;
        let dt = params.horizon / n_time as f64;
        let stability_ratio = params.beta * dt / (dx * dx);
        if stability_ratio > MAX_STABILITY_RATIO * (1.0 + 1e-12) {
            return Err(config(format!(
                "unstable grid: beta dt / dx^2 = {stability_ratio:.4} exceeds {MAX_STABILITY_RATIO}"
            )));
        }
        Ok(Grid {
            n_space,
            dx,
            n_time,
            dt,
            stability_ratio,
        })
    }

    /// Coarsest grid with `dx <= max_dx` and `beta dt / dx^2 <= ratio`.
    pub fn with_resolution(params: &ModelParams, max_dx: f64, ratio: f64) -> Result<Self> {
        if !(max_dx > 0.0) || !(ratio > 0.0 && ratio <= MAX_STABILITY_RATIO) {
            return Err(config(format!(
                "invalid resolution: max_dx = {max_dx}, stability ratio = {ratio}"
            )));
        }
        let n_space = ((params.domain_length / max_dx - 1e-9).ceil() as usize).max(8);
        let dx = params.domain_length / n_space as f64;
        let dt_max = ratio * dx * dx / params.beta;
        let n_time = ((params.horizon / dt_max - 1e-9).ceil() as usize).max(1);
        Grid::new(params, n_space, n_time)
    }

    /// Like [`Grid::with_resolution`], with the step count raised until every
    /// time in `times` falls on a step.
    pub fn aligned(params: &ModelParams, max_dx: f64, ratio: f64, times: &[f64]) -> Result<Self> {
        let base = Grid::with_resolution(params, max_dx, ratio)?;
        for n_time in base.n_time..=4 * base.n_time {
            let g = Grid::new(params, base.n_space, n_time)?;
            if times.iter().all(|&t| g.step_of(t).is_ok()) {
                return Ok(g);
            }
        }
        Err(config("no step count up to 4x the minimum aligns with the output times"))
    }

    /// Step index whose end time is `t`.
    pub fn step_of(&self, t: f64) -> Result<usize> {
        let k = (t / self.dt).round();
        let horizon = self.dt * self.n_time as f64;
        if !(t >= 0.0) || k > self.n_time as f64 || (k * self.dt - t).abs() > 1e-9 * horizon.max(1.0) {
            return Err(config(format!(
                "output time {t} is not a step of the grid (dt = {})",
                self.dt
            )));
        }
        Ok(k as usize)
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    /// Cell containing `x`.
    pub fn cell_of(&self, x: f64) -> usize {
        ((x / self.dx).floor().max(0.0) as usize).min(self.n_space - 1)
    }
}

/// One realized path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `u` at the cell centres, one row per output time.
    pub field: Vec<Vec<f64>>,
    /// Centred spatial averages `F_L(t)`.
    pub f_l: Vec<f64>,
    /// Spatial averages of `sigma(u)^2`.
    pub sigma_sq: Vec<f64>,
    pub seed: u64,
}

/// Independent replicates of the spatial average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub params: ModelParams,
    pub grid: Grid,
    pub times: Vec<f64>,
    pub n_rep: usize,
    pub master_seed: u64,
    /// `F_L`, row-major `n_rep x times.len()`.
    pub f_l: Vec<f64>,
    /// Spatial averages of `sigma(u)^2`, same layout as `f_l`.
    pub sigma_sq: Vec<f64>,
    /// Cell centres at which `u` was retained.
    pub probes: Vec<f64>,
    /// `u` at the probes, laid out `[replicate][time][probe]`.
    pub probe_values: Vec<f64>,
}

impl Ensemble {
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * self.params.horizon.max(1.0))
            .ok_or_else(|| config(format!("time {t} was not sampled")))
    }

    pub fn row(&self, rep: usize) -> &[f64] {
        let m = self.n_times();
        &self.f_l[rep * m..(rep + 1) * m]
    }

    /// `F_L(t)` across replicates.
    pub fn column(&self, t: f64) -> Result<Vec<f64>> {
        let j = self.time_index(t)?;
        Ok((0..self.n_rep).map(|r| self.f_l[r * self.n_times() + j]).collect())
    }

    /// `sqrt(L) F_L(t)` across replicates.
    pub fn scaled_column(&self, t: f64) -> Result<Vec<f64>> {
        let s = self.params.domain_length.sqrt();
        Ok(self.column(t)?.into_iter().map(|v| s * v).collect())
    }

    /// Replicate matrix of `sqrt(L) F_L` at the given times.
    pub fn scaled_matrix(&self, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        let idx = times.iter().map(|&t| self.time_index(t)).collect::<Result<Vec<_>>>()?;
        let s = self.params.domain_length.sqrt();
        Ok((0..self.n_rep)
            .map(|r| idx.iter().map(|&j| s * self.row(r)[j]).collect())
            .collect())
    }

    /// `u(t, probe)` across replicates.
    pub fn probe_column(&self, t: f64, x: f64) -> Result<(f64, Vec<f64>)> {
        let j = self.time_index(t)?;
        let cell = self.grid.cell_of(x);
        let center = self.grid.cell_center(cell);
        let p = self
            .probes
            .iter()
            .position(|&c| (c - center).abs() < 1e-12 * self.params.domain_length)
            .ok_or_else(|| config(format!("no field retained near x = {x}")))?;
        let np = self.probes.len();
        let m = self.n_times();
        Ok((
            center,
            (0..self.n_rep)
                .map(|r| self.probe_values[(r * m + j) * np + p])
                .collect(),
        ))
    }

    /// Ensemble mean of the averaged `sigma(u)^2` at each output time.
    pub fn sigma_sq_profile(&self) -> Vec<f64> {
        let m = self.n_times();
        (0..m)
            .map(|j| (0..self.n_rep).map(|r| self.sigma_sq[r * m + j]).sum::<f64>() / self.n_rep as f64)
            .collect()
    }
}

/// Precomputed per-run data shared by all replicates.
struct Plan {
    steps: Vec<usize>,
    /// Mean of `I_0(t, x_i)` over the cells, per output time.
    centering: Vec<f64>,
    probe_cells: Vec<usize>,
}

impl Plan {
    fn new(params: &ModelParams, grid: &Grid, times: &[f64], probes: &[f64]) -> Result<Self> {
        params.validate()?;
        if grid.stability_ratio > MAX_STABILITY_RATIO * (1.0 + 1e-12) {
            return Err(config("unstable grid"));
        }
        if (grid.dx * grid.n_space as f64 - params.domain_length).abs() > 1e-9 * params.domain_length
            || (grid.dt * grid.n_time as f64 - params.horizon).abs() > 1e-9 * params.horizon
        {
            return Err(config("grid does not match the model parameters"));
        }
        if times.is_empty() {
            return Err(config("no output times"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(config("output times must be strictly increasing"));
        }
        let steps = times.iter().map(|&t| grid.step_of(t)).collect::<Result<Vec<_>>>()?;
        let mut centering = Vec::with_capacity(times.len());
        for &t in times {
            let mean = match params.boundary {
                Boundary::Neumann | Boundary::Periodic => green_mass(params, t, 0.0, CENTERING_TOL)?,
                Boundary::Dirichlet => {
                    let mut acc = 0.0;
                    for i in 0..grid.n_space {
                        acc += green_mass(params, t, grid.cell_center(i), CENTERING_TOL)?;
                    }
                    acc / grid.n_space as f64
                }
            };
            centering.push(mean);
        }
        let mut probe_cells = Vec::with_capacity(probes.len());
        for &x in probes {
            if !(0.0..=params.domain_length).contains(&x) {
                return Err(config(format!("probe {x} outside the domain")));
            }
            probe_cells.push(grid.cell_of(x));
        }
        Ok(Plan {
            steps,
            centering,
            probe_cells,
        })
    }
}

struct PathOutput {
    f_l: Vec<f64>,
    sigma_sq: Vec<f64>,
    probes: Vec<f64>,
    field: Vec<Vec<f64>>,
}

/// Work buffers reused across replicates on one thread.
#[derive(Default)]
struct Buffers {
    u: Vec<f64>,
    next: Vec<f64>,
    noise: Vec<f64>,
}

fn run_path<N: NoiseSource>(
    params: &ModelParams,
    grid: &Grid,
    plan: &Plan,
    noise: &mut N,
    keep_field: bool,
    buf: &mut Buffers,
) -> Result<PathOutput> {
    match params.sigma {
        Sigma::Affine { sigma1, sigma0 } => {
            run_path_with(params, grid, plan, noise, keep_field, buf, |u| sigma1 * u + sigma0)
        }
        Sigma::Named { func, .. } => run_path_with(params, grid, plan, noise, keep_field, buf, |u| func.eval(u)),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_path_with<N: NoiseSource, S: Fn(f64) -> f64>(
    params: &ModelParams,
    grid: &Grid,
    plan: &Plan,
    noise: &mut N,
    keep_field: bool,
    buf: &mut Buffers,
    sigma: S,
) -> Result<PathOutput> {
    let n = grid.n_space;
    let m = plan.steps.len();
    let mut out = PathOutput {
        f_l: Vec::with_capacity(m),
        sigma_sq: Vec::with_capacity(m),
        probes: Vec::with_capacity(m * plan.probe_cells.len()),
        field: Vec::new(),
    };
    buf.u.clear();
    buf.u.resize(n, 1.0);
    buf.next.resize(n, 0.0);
    buf.noise.resize(n, 0.0);

    let diff = 0.5 * params.beta * grid.dt / (grid.dx * grid.dx);
    let keep = 1.0 - params.alpha * grid.dt;
    let amp = (grid.dt / grid.dx).sqrt();
    let bc = params.boundary;

    let record = |u: &[f64], k: usize, out: &mut PathOutput| {
        let mean = u.iter().sum::<f64>() / n as f64;
        out.f_l.push(mean - plan.centering[k]);
        out.sigma_sq
            .push(u.iter().map(|&v| sigma(v) * sigma(v)).sum::<f64>() / n as f64);
        out.probes.extend(plan.probe_cells.iter().map(|&c| u[c]));
        if keep_field {
            out.field.push(u.to_vec());
        }
    };

    let mut next_out = 0;
    while next_out < m && plan.steps[next_out] == 0 {
        record(&buf.u, next_out, &mut out);
        next_out += 1;
    }
    let last_step = plan.steps[m - 1];
    for step in 1..=last_step {
        noise.fill(step - 1, &mut buf.noise);
        let (u, v, xi) = (&buf.u, &mut buf.next, &buf.noise);
        let (left_ghost, right_ghost) = match bc {
            Boundary::Neumann => (u[0], u[n - 1]),
            Boundary::Dirichlet => (-u[0], -u[n - 1]),
            Boundary::Periodic => (u[n - 1], u[0]),
        };
        let update = |c: f64, l: f64, r: f64, z: f64| keep * c + diff * (l - 2.0 * c + r) + sigma(c) * amp * z;
        v[0] = update(u[0], left_ghost, u[1], xi[0]);
        for i in 1..n - 1 {
            v[i] = update(u[i], u[i - 1], u[i + 1], xi[i]);
        }
        v[n - 1] = update(u[n - 1], u[n - 2], right_ghost, xi[n - 1]);
        std::mem::swap(&mut buf.u, &mut buf.next);
        if buf.u.iter().any(|x| !(x.abs() <= BLOWUP_LIMIT)) {
            return Err(Error::Numerical {
                step,
                detail: format!("field left [-{BLOWUP_LIMIT:e}, {BLOWUP_LIMIT:e}] or became non-finite"),
            });
        }
        while next_out < m && plan.steps[next_out] == step {
            record(&buf.u, next_out, &mut out);
            next_out += 1;
        }
    }
    Ok(out)
}

/// Simulates one path with noise from stream 0 of `seed`, keeping the field
/// at every output time. Identical to replicate 0 of an ensemble with master
/// seed `seed`.
pub fn simulate_path(params: &ModelParams, grid: &Grid, output_times: &[f64], seed: u64) -> Result<Trajectory> {
    let mut noise = GaussianStream::new(seed, 0);
    simulate_with_noise(params, grid, output_times, &mut noise, seed)
}

/// [`simulate_path`] with a caller-supplied noise source.
pub fn simulate_with_noise<N: NoiseSource>(
    params: &ModelParams,
    grid: &Grid,
    output_times: &[f64],
    noise: &mut N,
    seed: u64,
) -> Result<Trajectory> {
    let plan = Plan::new(params, grid, output_times, &[])?;
    let out = run_path(params, grid, &plan, noise, true, &mut Buffers::default())?;
    Ok(Trajectory {
        times: output_times.to_vec(),
        field: out.field,
        f_l: out.f_l,
        sigma_sq: out.sigma_sq,
        seed,
    })
}

/// Options for [`run_ensemble_with`].
#[derive(Debug, Clone, Default)]
pub struct EnsembleOptions {
    /// Positions whose cell values are retained for every replicate.
    pub probes: Vec<f64>,
}

/// `n_rep` independent replicates; replicate `i` draws from stream `i` of
/// `master_seed`. Only the spatial averages are retained.
pub fn run_ensemble(
    params: &ModelParams,
    grid: &Grid,
    output_times: &[f64],
    n_rep: usize,
    master_seed: u64,
) -> Result<Ensemble> {
    run_ensemble_with(params, grid, output_times, n_rep, master_seed, &EnsembleOptions::default())
}

pub fn run_ensemble_with(
    params: &ModelParams,
    grid: &Grid,
    output_times: &[f64],
    n_rep: usize,
    master_seed: u64,
    options: &EnsembleOptions,
) -> Result<Ensemble> {
    if n_rep < 2 {
        return Err(config(format!("an ensemble needs at least 2 replicates, got {n_rep}")));
    }
    let plan = Plan::new(params, grid, output_times, &options.probes)?;
    let results: Vec<Result<PathOutput>> = (0..n_rep)
        .into_par_iter()
        .map_init(Buffers::default, |buf, i| {
            let mut noise = GaussianStream::new(master_seed, i as u64);
            run_path(params, grid, &plan, &mut noise, false, buf)
        })
        .collect();

    let m = output_times.len();
    let mut ens = Ensemble {
        params: *params,
        grid: *grid,
        times: output_times.to_vec(),
        n_rep,
        master_seed,
        f_l: Vec::with_capacity(n_rep * m),
        sigma_sq: Vec::with_capacity(n_rep * m),
        probes: plan.probe_cells.iter().map(|&c| grid.cell_center(c)).collect(),
        probe_values: Vec::with_capacity(n_rep * m * options.probes.len()),
    };
    for (index, r) in results.into_iter().enumerate() {
        let out = r.map_err(|e| Error::Replicate {
            index,
            source: Box::new(e),
        })?;
        ens.f_l.extend(out.f_l);
        ens.sigma_sq.extend(out.sigma_sq);
        ens.probe_values.extend(out.probes);
    }
    Ok(ens)
}

/// Empirical mean of `u(t, x)` against the mean field `I_0(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldReport {
    pub t: f64,
    /// Cell centre the values were taken at.
    pub x: f64,
    pub empirical_mean: f64,
    pub reference: f64,
    /// `|empirical_mean - reference|`
    pub discrepancy: f64,
    pub std_error: f64,
    pub n: usize,
}

impl MeanFieldReport {
    pub fn z_score(&self) -> f64 {
        if self.std_error > 0.0 {
            self.discrepancy / self.std_error
        } else if self.discrepancy == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

const MIN_MEAN_FIELD_REPLICATES: usize = 1000;

/// Compares the ensemble mean of `u(t, x)` with `I_0(t, x)`; the ensemble
/// must have been run with a probe at `x`.
pub fn mean_field_check(ensemble: &Ensemble, t: f64, x: f64) -> Result<MeanFieldReport> {
    let (center, values) = ensemble.probe_column(t, x)?;
    mean_field_report(&ensemble.params, t, center, &values)
}

/// [`mean_field_check`] over simulated trajectories.
pub fn mean_field_check_paths(
    params: &ModelParams,
    grid: &Grid,
    paths: &[Trajectory],
    t: f64,
    x: f64,
) -> Result<MeanFieldReport> {
    let cell = grid.cell_of(x);
    let values = paths
        .iter()
        .map(|p| {
            let j = p
                .times
                .iter()
                .position(|&s| (s - t).abs() <= 1e-9 * params.horizon.max(1.0))
                .ok_or_else(|| config(format!("time {t} was not sampled")))?;
            p.field
                .get(j)
                .and_then(|row| row.get(cell).copied())
                .ok_or_else(|| config("trajectory does not retain its field"))
        })
        .collect::<Result<Vec<_>>>()?;
    mean_field_report(params, t, grid.cell_center(cell), &values)
}

fn mean_field_report(params: &ModelParams, t: f64, x: f64, values: &[f64]) -> Result<MeanFieldReport> {
    if values.len() < MIN_MEAN_FIELD_REPLICATES {
        return Err(config(format!(
            "mean-field check needs >= {MIN_MEAN_FIELD_REPLICATES} replicates, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let reference = green_mass(params, t, x, CENTERING_TOL)?;
    Ok(MeanFieldReport {
        t,
        x,
        empirical_mean: mean,
        reference,
        discrepancy: (mean - reference).abs(),
        std_error: (var / n).sqrt(),
        n: values.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(bc: Boundary, alpha: f64, len: f64, s1: f64, s0: f64) -> ModelParams {
        ModelParams::new(alpha, 1.0, len, 1.0, bc, Sigma::affine(s1, s0)).unwrap()
    }

    #[test]
    fn grid_construction() {
        let p = params(Boundary::Neumann, 0.0, 16.0, 1.0, 0.0);
        let g = Grid::with_resolution(&p, 0.1, 0.25).unwrap();
        assert_eq!(g.n_space, 160);
        assert_eq!(g.n_time, 400);
        assert!(g.stability_ratio <= 0.25 + 1e-12);
        assert!(Grid::new(&p, 160, 100).is_err());
        assert!(Grid::new(&p, 4, 100).is_err());
        assert_eq!(g.step_of(0.25).unwrap(), 100);
        assert!(g.step_of(0.2501).is_err());
        assert!(g.step_of(1.5).is_err());
        let a = Grid::aligned(&p, 0.1, 0.25, &[1.0 / 3.0]).unwrap();
        assert!(a.step_of(1.0 / 3.0).is_ok());
    }

    #[test]
    fn deterministic_decay_without_noise() {
        let p = params(Boundary::Neumann, 1.0, 4.0, 0.0, 0.0);
        let g = Grid::with_resolution(&p, 0.1, 0.25).unwrap();
        let tr = simulate_path(&p, &g, &[0.0, 0.5, 1.0], 3).unwrap();
        for (k, &t) in tr.times.iter().enumerate() {
            let exact = (-t).exp();
            for &u in &tr.field[k] {
                assert!((u - exact).abs() < 2.0 * g.dt, "t = {t}");
            }
            assert!(tr.f_l[k].abs() < 2.0 * g.dt);
        }
    }

    #[test]
    fn dirichlet_without_noise_tracks_mean_field() {
        let p = params(Boundary::Dirichlet, 0.2, 2.0, 0.0, 0.0);
        let g = Grid::with_resolution(&p, 0.02, 0.25).unwrap();
        let tr = simulate_path(&p, &g, &[0.5, 1.0], 0).unwrap();
        for k in 0..2 {
            assert!(tr.f_l[k].abs() < 5e-3, "F_L = {}", tr.f_l[k]);
        }
    }

    #[test]
    fn simulate_path_is_replicate_zero() {
        let p = params(Boundary::Periodic, 0.3, 2.0, 0.5, 0.5);
        let g = Grid::with_resolution(&p, 0.1, 0.25).unwrap();
        let tr = simulate_path(&p, &g, &[0.5, 1.0], 99).unwrap();
        let ens = run_ensemble(&p, &g, &[0.5, 1.0], 3, 99).unwrap();
        assert_eq!(ens.row(0), &tr.f_l[..]);
        assert_ne!(ens.row(0), ens.row(1));
    }

    #[test]
    fn rejects_bad_output_times() {
        let p = params(Boundary::Neumann, 0.0, 2.0, 1.0, 0.0);
        let g = Grid::with_resolution(&p, 0.1, 0.25).unwrap();
        assert!(simulate_path(&p, &g, &[0.5, 0.25], 0).is_err());
        assert!(simulate_path(&p, &g, &[0.1234567], 0).is_err());
        assert!(run_ensemble(&p, &g, &[0.5], 1, 0).is_err());
        let other = params(Boundary::Neumann, 0.0, 4.0, 1.0, 0.0);
        assert!(simulate_path(&other, &g, &[0.5], 0).is_err());
    }

    #[test]
    fn blowup_is_reported_with_step() {
        let p = ModelParams::new(-60.0, 1.0, 1.0, 1.0, Boundary::Neumann, Sigma::affine(0.0, 0.0)).unwrap();
        let g = Grid::with_resolution(&p, 0.1, 0.25).unwrap();
        match run_ensemble(&p, &g, &[1.0], 2, 0) {
            Err(Error::Replicate { index: 0, source }) => {
                assert!(matches!(*source, Error::Numerical { step, .. } if step > 0));
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn mean_field_requires_replicates() {
        let p = params(Boundary::Neumann, 1.0, 2.0, 0.0, 1.0);
        let g = Grid::with_resolution(&p, 0.1, 0.25).unwrap();
        let opts = EnsembleOptions { probes: vec![1.0] };
        let ens = run_ensemble_with(&p, &g, &[1.0], 10, 0, &opts).unwrap();
        assert!(matches!(mean_field_check(&ens, 1.0, 1.0), Err(Error::Config(_))));
        assert!(mean_field_check(&ens, 1.0, 0.2).is_err());
    }

    #[test]
    fn additive_mean_field() {
        let p = params(Boundary::Neumann, 1.0, 2.0, 0.0, 1.0);
        let g = Grid::with_resolution(&p, 0.1, 0.25).unwrap();
        let opts = EnsembleOptions { probes: vec![1.0] };
        let ens = run_ensemble_with(&p, &g, &[1.0], 2000, 5, &opts).unwrap();
        let r = mean_field_check(&ens, 1.0, 1.0).unwrap();
        // the scheme's mean decays as (1 - alpha dt)^n, within O(dt) of I_0
        assert!(r.discrepancy < 3.0 * r.std_error + 2.0 * g.dt, "{r:?}");
    }
}
