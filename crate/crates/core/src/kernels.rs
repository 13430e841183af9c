//! Gaussian heat kernel and the Green's function of the cable equation on
//! `[0, L]`.
//!
//! `G_t(x, y) = exp(-alpha t) g_{beta t}(x, y)` where `g_s` is the heat
//! kernel of variance `s` on the interval. `g` is available in two
//! independent forms: a lattice sum of whole-line Gaussians (method of
//! images) and an eigenfunction series. Each truncation carries an explicit
//! bound on the discarded tail.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::params::{Boundary, ModelParams};
use crate::quadrature::GaussLegendre;
use crate::special::{normal_interval, normal_sf};

/// Below this value of `beta t / L^2` the spectral series is replaced by the
/// image sum.
pub const SPECTRAL_SWITCH: f64 = 1e-4;

const MAX_TERMS: usize = 1_000_000;

/// Which series represents the Green's function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    ImageSum,
    Spectral,
}

/// A truncated-series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: f64,
    /// Lattice half-width (image sum) or number of modes (spectral).
    pub truncation_terms: usize,
    /// Bound on the absolute truncation error of `value`.
    pub tail_estimate: f64,
    /// Representation actually evaluated.
    pub representation: Representation,
    /// Set when a spectral request was served by the image sum.
    pub switched: bool,
}

/// `p_t(z) = exp(-z^2 / 2t) / sqrt(2 pi t)`.
pub fn heat_kernel(t: f64, z: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain(format!("heat kernel needs t > 0, got {t}")));
    }
    Ok(gauss(t, z))
}

#[inline]
fn gauss(s: f64, z: f64) -> f64 {
    (-z * z / (2.0 * s)).exp() / (2.0 * PI * s).sqrt()
}

/// Bound on `sum_{j >= j0} p_s(j * len)` for `j0 >= 1`.
fn lattice_tail(s: f64, len: f64, j0: usize) -> f64 {
    let j = j0 as f64;
    let first = gauss(s, j * len);
    let ratio = (-(2.0 * j + 1.0) * len * len / (2.0 * s)).exp();
    if ratio >= 1.0 {
        f64::INFINITY
    } else {
        first / (1.0 - ratio)
    }
}

/// Bound on `sum_{n > n0} exp(-c n^2)`.
fn spectral_tail(c: f64, n0: usize) -> f64 {
    let n = n0 as f64 + 1.0;
    let ratio = (-c * (2.0 * n + 1.0)).exp();
    if ratio >= 1.0 {
        f64::INFINITY
    } else {
        (-c * n * n).exp() / (1.0 - ratio)
    }
}

fn check_points(len: f64, x: f64, y: f64) -> Result<()> {
    for (name, v) in [("x", x), ("y", y)] {
        if !(0.0..=len).contains(&v) {
            return Err(domain(format!("{name} = {v} outside [0, {len}]")));
        }
    }
    Ok(())
}

fn image_sum(bc: Boundary, len: f64, s: f64, x: f64, y: f64, tol: f64) -> Result<KernelEval> {
    let d = (x - y).abs();
    let w = x + y;
    let (mut value, tail_of): (f64, Box<dyn Fn(usize) -> f64>) = match bc {
        Boundary::Neumann => (
            gauss(s, d) + gauss(s, w),
            Box::new(move |n| 2.0 * lattice_tail(s, len, 2 * n)),
        ),
        Boundary::Dirichlet => (
            gauss(s, d) - gauss(s, w),
            Box::new(move |n| 2.0 * lattice_tail(s, len, 2 * n)),
        ),
        Boundary::Periodic => (gauss(s, d), Box::new(move |n| 2.0 * lattice_tail(s, len, n))),
    };
    let mut n = 0usize;
    loop {
        n += 1;
        let shift = match bc {
            Boundary::Periodic => n as f64 * len,
            _ => 2.0 * n as f64 * len,
        };
        let direct = gauss(s, d + shift) + gauss(s, d - shift);
        value += match bc {
            Boundary::Neumann => direct + gauss(s, w + shift) + gauss(s, w - shift),
            Boundary::Dirichlet => direct - gauss(s, w + shift) - gauss(s, w - shift),
            Boundary::Periodic => direct,
        };
        let tail = tail_of(n);
        if tail < tol / 4.0 {
            return Ok(KernelEval {
                value,
                truncation_terms: n,
                tail_estimate: tail,
                representation: Representation::ImageSum,
                switched: false,
            });
        }
        if n >= MAX_TERMS {
            return Err(Error::Truncation {
                achieved: tail,
                requested: tol,
                terms: n,
            });
        }
    }
}

fn spectral(bc: Boundary, len: f64, s: f64, x: f64, y: f64, tol: f64) -> Result<KernelEval> {
    let (c, mode): (f64, Box<dyn Fn(f64) -> f64>) = match bc {
        Boundary::Neumann => (
            PI * PI * s / (2.0 * len * len),
            Box::new(move |n| 2.0 * (n * PI * x / len).cos() * (n * PI * y / len).cos()),
        ),
        Boundary::Dirichlet => (
            PI * PI * s / (2.0 * len * len),
            Box::new(move |n| 2.0 * (n * PI * x / len).sin() * (n * PI * y / len).sin()),
        ),
        Boundary::Periodic => {
            let d = (x - y).abs();
            (
                2.0 * PI * PI * s / (len * len),
                Box::new(move |n| 2.0 * (2.0 * PI * n * d / len).cos()),
            )
        }
    };
    let mut sum = match bc {
        Boundary::Dirichlet => 0.0,
        _ => 1.0,
    };
    let mut n = 0usize;
    loop {
        n += 1;
        let nf = n as f64;
        sum += mode(nf) * (-c * nf * nf).exp();
        let tail = 2.0 / len * spectral_tail(c, n);
        if tail < tol / 4.0 {
            return Ok(KernelEval {
                value: sum / len,
                truncation_terms: n,
                tail_estimate: tail,
                representation: Representation::Spectral,
                switched: false,
            });
        }
        if n >= MAX_TERMS {
            return Err(Error::Truncation {
                achieved: tail,
                requested: tol,
                terms: n,
            });
        }
    }
}

/// Heat kernel `g_s(x, y)` of variance `s` on `[0, len]`.
pub fn heat_green(
    bc: Boundary,
    rep: Representation,
    len: f64,
    s: f64,
    x: f64,
    y: f64,
    tol: f64,
) -> Result<KernelEval> {
    if !(s > 0.0) {
        return Err(domain(format!("kernel variance must be positive, got {s}")));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    check_points(len, x, y)?;
    match rep {
        Representation::ImageSum => image_sum(bc, len, s, x, y, tol),
        Representation::Spectral if s / (len * len) < SPECTRAL_SWITCH => {
            let mut eval = image_sum(bc, len, s, x, y, tol)?;
            eval.switched = true;
            Ok(eval)
        }
        Representation::Spectral => spectral(bc, len, s, x, y, tol),
    }
}

/// Green's function `G_t(x, y)` with absolute truncation error at most `tol`.
pub fn green(
    params: &ModelParams,
    rep: Representation,
    t: f64,
    x: f64,
    y: f64,
    tol: f64,
) -> Result<KernelEval> {
    check_time(params, t)?;
    let decay = (-params.alpha * t).exp();
    let mut eval = heat_green(
        params.boundary,
        rep,
        params.domain_length,
        params.beta * t,
        x,
        y,
        tol / decay,
    )?;
    eval.value *= decay;
    eval.tail_estimate *= decay;
    Ok(eval)
}

fn check_time(params: &ModelParams, t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(domain(format!("kernel time must be positive, got {t}")));
    }
    if t > params.horizon * (1.0 + 1e-12) {
        return Err(domain(format!("t = {t} beyond horizon {}", params.horizon)));
    }
    Ok(())
}

/// Spatial mass `I_0(t, x) = int_0^L G_t(x, y) dy`, with `I_0(0, x) = 1`.
pub fn green_mass(params: &ModelParams, t: f64, x: f64, tol: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(domain(format!("mass needs t >= 0, got {t}")));
    }
    if t > params.horizon * (1.0 + 1e-12) {
        return Err(domain(format!("t = {t} beyond horizon {}", params.horizon)));
    }
    let len = params.domain_length;
    check_points(len, x, x)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let decay = (-params.alpha * t).exp();
    match params.boundary {
        Boundary::Neumann | Boundary::Periodic => Ok(decay),
        Boundary::Dirichlet => {
            let s = params.beta * t;
            let mass = dirichlet_heat_mass(len, s, x, tol / decay)?;
            Ok(decay * mass.clamp(0.0, 1.0))
        }
    }
}

/// `int_0^len g_s(x, y) dy` for the Dirichlet heat kernel.
pub fn dirichlet_heat_mass(len: f64, s: f64, x: f64, tol: f64) -> Result<f64> {
    if s / (len * len) < SPECTRAL_SWITCH {
        dirichlet_mass_images(len, s, x, tol)
    } else {
        dirichlet_mass_spectral(len, s, x, tol)
    }
}

fn dirichlet_mass_spectral(len: f64, s: f64, x: f64, tol: f64) -> Result<f64> {
    let c = PI * PI * s / (2.0 * len * len);
    let mut sum = 0.0;
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        // (1 - cos n pi) vanishes for even n
        sum += 4.0 / (nf * PI) * (nf * PI * x / len).sin() * (-c * nf * nf).exp();
        let tail = 4.0 / ((nf + 1.0) * PI) * spectral_tail(c, n);
        if tail < tol {
            return Ok(sum);
        }
        if n >= MAX_TERMS {
            return Err(Error::Truncation {
                achieved: tail,
                requested: tol,
                terms: n,
            });
        }
        n += 2;
    }
}

fn dirichlet_mass_images(len: f64, s: f64, x: f64, tol: f64) -> Result<f64> {
    let sd = s.sqrt();
    // mass of p_s(x - y + a) and p_s(x + y + a) over y in [0, len]
    let term = |a: f64| {
        normal_interval((x - len + a) / sd, (x + a) / sd)
            - normal_interval((x + a) / sd, (x + len + a) / sd)
    };
    let mut value = term(0.0);
    let mut n = 0usize;
    loop {
        n += 1;
        let shift = 2.0 * n as f64 * len;
        value += term(shift) + term(-shift);
        // excluded images sit at distance >= 2 j len, j >= n
        let h = 2.0 * len / sd;
        let a = n as f64 * h;
        let ratio = (-a * h - 0.5 * h * h).exp();
        let tail = 4.0 * normal_sf(a) / (1.0 - ratio);
        if tail < tol {
            return Ok(value);
        }
        if n >= MAX_TERMS {
            return Err(Error::Truncation {
                achieved: tail,
                requested: tol,
                terms: n,
            });
        }
    }
}

/// `K_T = exp(|alpha| T) (4 + 4 / (1 - exp(-1 / (beta T))))`, the constant in
/// the Gaussian upper bound `G_t(x, y) <= K_T p_{beta t}(x - y)`.
pub fn domination_constant(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let bt = params.beta * params.horizon;
    Ok((params.alpha.abs() * params.horizon).exp() * (4.0 + 4.0 / (-(-1.0 / bt).exp_m1())))
}

/// Panel count for integrating a kernel of variance `s` across `[0, len]`.
fn panels_for(len: f64, s: f64) -> usize {
    ((len * len / s).sqrt() * 2.0).ceil() as usize + 2
}

/// Quadrature of `y -> G_t(x, y)` over `[0, L]`.
pub fn mass_by_quadrature(params: &ModelParams, rep: Representation, t: f64, x: f64, tol: f64) -> Result<f64> {
    let gl = GaussLegendre::new(20);
    let panels = panels_for(params.domain_length, params.beta * t);
    let mut err = None;
    let v = gl.composite(
        |y| match green(params, rep, t, x, y.clamp(0.0, params.domain_length), tol) {
            Ok(e) => e.value,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        params.domain_length,
        panels,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Quadrature of `z -> G_t(x, z) G_s(z, y)` over `[0, L]`.
pub fn semigroup_by_quadrature(
    params: &ModelParams,
    rep: Representation,
    t: f64,
    s: f64,
    x: f64,
    y: f64,
    tol: f64,
) -> Result<f64> {
    let gl = GaussLegendre::new(20);
    let panels = panels_for(params.domain_length, params.beta * t.min(s));
    let len = params.domain_length;
    let mut err = None;
    let v = gl.composite(
        |z| {
            let z = z.clamp(0.0, len);
            match (green(params, rep, t, x, z, tol), green(params, rep, s, z, y, tol)) {
                (Ok(a), Ok(b)) => a.value * b.value,
                (Err(e), _) | (_, Err(e)) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        len,
        panels,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Sigma;

    fn params(bc: Boundary, alpha: f64, beta: f64, len: f64, horizon: f64) -> ModelParams {
        ModelParams::new(alpha, beta, len, horizon, bc, Sigma::affine(1.0, 0.0)).unwrap()
    }

    #[test]
    fn heat_kernel_values() {
        assert!((heat_kernel(1.0, 0.0).unwrap() - 0.398_942_280_4).abs() < 1e-10);
        assert_eq!(heat_kernel(2.0, 1.0).unwrap(), heat_kernel(2.0, -1.0).unwrap());
        assert!(heat_kernel(0.0, 1.0).is_err());
        assert!(heat_kernel(-1.0, 1.0).is_err());
        let gl = GaussLegendre::new(30);
        let mass = gl.composite(|z| heat_kernel(1.0, z).unwrap(), -10.0, 10.0, 20);
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn neumann_mass_by_quadrature() {
        let p = params(Boundary::Neumann, 0.0, 1.0, 5.0, 1.0);
        for rep in [Representation::ImageSum, Representation::Spectral] {
            let m = mass_by_quadrature(&p, rep, 0.3, 1.7, 1e-10).unwrap();
            assert!((m - 1.0).abs() < 1e-8, "{rep:?}: {m}");
        }
    }

    #[test]
    fn periodic_equilibrium() {
        let p = params(Boundary::Periodic, 0.0, 1.0, 2.0, 100.0);
        for rep in [Representation::ImageSum, Representation::Spectral] {
            for &(x, y) in &[(0.0, 2.0), (0.3, 1.1), (1.0, 1.0)] {
                let g = green(&p, rep, 100.0, x, y, 1e-10).unwrap();
                assert!((g.value - 0.5).abs() < 1e-8, "{rep:?} ({x},{y}) {}", g.value);
            }
        }
    }

    #[test]
    fn dirichlet_representations_agree() {
        let p = params(Boundary::Dirichlet, 0.0, 1.0, 1.0, 1.0);
        let a = green(&p, Representation::ImageSum, 0.1, 0.5, 0.5, 1e-10).unwrap();
        let b = green(&p, Representation::Spectral, 0.1, 0.5, 0.5, 1e-10).unwrap();
        assert_eq!(b.representation, Representation::Spectral);
        assert!((a.value - b.value).abs() < 1e-8);
    }

    #[test]
    fn exact_symmetry() {
        for bc in Boundary::ALL {
            let p = params(bc, 0.4, 1.3, 3.0, 1.0);
            for rep in [Representation::ImageSum, Representation::Spectral] {
                let a = green(&p, rep, 0.37, 0.2, 2.9, 1e-9).unwrap().value;
                let b = green(&p, rep, 0.37, 2.9, 0.2, 1e-9).unwrap().value;
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn small_time_switches_to_images() {
        let p = params(Boundary::Neumann, 0.0, 1.0, 10.0, 1.0);
        let e = green(&p, Representation::Spectral, 1e-3, 5.0, 5.0, 1e-8).unwrap();
        assert!(e.switched);
        assert_eq!(e.representation, Representation::ImageSum);
        let direct = heat_kernel(1e-3, 0.0).unwrap();
        assert!((e.value - direct).abs() < 1e-8);
    }

    #[test]
    fn tail_estimate_within_tolerance() {
        for bc in Boundary::ALL {
            let p = params(bc, -0.5, 2.0, 4.0, 2.0);
            for rep in [Representation::ImageSum, Representation::Spectral] {
                let e = green(&p, rep, 1.5, 1.0, 3.0, 1e-9).unwrap();
                assert!(e.tail_estimate <= 1e-9);
                assert!(e.truncation_terms >= 1);
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = params(Boundary::Neumann, 0.0, 1.0, 2.0, 1.0);
        assert!(green(&p, Representation::ImageSum, 0.0, 1.0, 1.0, 1e-8).is_err());
        assert!(green(&p, Representation::ImageSum, 0.5, -0.1, 1.0, 1e-8).is_err());
        assert!(green(&p, Representation::ImageSum, 0.5, 1.0, 2.1, 1e-8).is_err());
        assert!(green(&p, Representation::ImageSum, 0.5, 1.0, 1.0, 0.0).is_err());
        assert!(green_mass(&p, -1e-3, 1.0, 1e-8).is_err());
    }

    #[test]
    fn mass_values() {
        let p = params(Boundary::Neumann, 0.7, 1.0, 5.0, 3.0);
        assert!((green_mass(&p, 2.0, 1.0, 1e-12).unwrap() - 0.246_596_963_9).abs() < 1e-10);
        for bc in Boundary::ALL {
            let p = params(bc, 0.7, 1.0, 5.0, 3.0);
            assert_eq!(green_mass(&p, 0.0, 2.5, 1e-8).unwrap(), 1.0);
        }
        let p = params(Boundary::Dirichlet, 0.0, 1.0, 50.0, 1.0);
        assert!((green_mass(&p, 0.1, 25.0, 1e-12).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dirichlet_mass_routes_agree_with_quadrature() {
        let p = params(Boundary::Dirichlet, 0.3, 1.0, 2.0, 1.0);
        for &x in &[0.0, 0.05, 0.6, 1.0, 1.95] {
            for &t in &[0.01, 0.2, 1.0] {
                let m = green_mass(&p, t, x, 1e-12).unwrap();
                let q = mass_by_quadrature(&p, Representation::ImageSum, t, x, 1e-12).unwrap();
                assert!((m - q).abs() < 1e-9, "x={x} t={t}: {m} vs {q}");
            }
        }
        // both series at a point near the switch
        let s = 0.5;
        let a = dirichlet_mass_images(10.0, s, 0.7, 1e-13).unwrap();
        let b = dirichlet_mass_spectral(10.0, s, 0.7, 1e-13).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn domination_constant_values() {
        let p = params(Boundary::Neumann, 0.0, 1.0, 1.0, 1.0);
        assert!((domination_constant(&p).unwrap() - 10.327_906_827_477_307).abs() < 1e-12);
        let p = params(Boundary::Neumann, 0.0, 1.0, 1.0, 1e-4);
        assert!((domination_constant(&p).unwrap() - 8.0).abs() < 1e-12);
    }
}
