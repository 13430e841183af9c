//! Simulation and verification toolkit for the stochastic cable equation
//!
//! ```text
//! du/dt = (beta/2) d2u/dx2 - alpha u + sigma(u) W'(t, x),   x in [0, L],  u(0, x) = 1
//! ```
//!
//! driven by space-time white noise, with Neumann, Dirichlet or periodic
//! boundary conditions. The crate is organised bottom-up:
//!
//! | Module        | Contents                                                                 |
//! |---------------|--------------------------------------------------------------------------|
//! | [`kernels`]   | Heat kernel, interval Green's functions (image sums and spectral series) |
//! | [`chaos`]     | Chaos coefficients `f_k`, the limit `f_sigma`, limiting covariance        |
//! | [`solver`]    | Finite-difference Euler–Maruyama solver and reproducible ensembles       |
//! | [`stats`]     | Distances to normality, decay fits, limit-process sampling, fdd tests    |
//! | [`harness`]   | Experiment configuration, execution and report serialization             |
//!
//! Supporting modules: [`special`] (normal CDF, Gamma), [`quadrature`]
//! (Gauss–Legendre and adaptive Gauss–Kronrod) and [`rng`] (counter-based
//! random streams).

pub mod chaos;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod solver;
pub mod special;
pub mod stats;

pub use chaos::{ChaosCoefficients, FSigma};
pub use error::{Error, Result};
pub use kernels::{KernelEval, Representation};
pub use params::{Boundary, ModelParams, NamedSigma, Sigma};
pub use solver::{Ensemble, Grid, Trajectory};
pub use stats::{DecayFit, DistanceEstimate, LimitProcessSample};
