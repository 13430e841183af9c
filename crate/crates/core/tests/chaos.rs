use cable_core::chaos::{chen_f, f_k_closed, f_k_oracle, f_sigma, f_sigma_upper_bound, limit_covariance};
use cable_core::special::gamma;
use cable_core::{Boundary, FSigma, ModelParams, Sigma};
use proptest::prelude::*;

fn params(alpha: f64, beta: f64, s1: f64, s0: f64, horizon: f64) -> ModelParams {
    ModelParams::new(alpha, beta, 8.0, horizon, Boundary::Neumann, Sigma::affine(s1, s0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn f_k_nonnegative_and_decaying(alpha in -1.0..1.0f64, beta in 0.3..3.0f64, s1 in -1.5..1.5f64,
                                    s0 in -1.5..1.5f64, t in 0.01..1.0f64) {
        let p = params(alpha, beta, s1, s0, 1.0);
        let f: Vec<f64> = (1..40).map(|k| f_k_closed(&p, k, t).unwrap()).collect();
        prop_assert!(f.iter().all(|v| *v >= 0.0 && v.is_finite()));
        prop_assert!(f[38] <= f[0].max(1.0) * 1e-3);
    }

    #[test]
    fn f_sigma_below_upper_bound(alpha in -1.0..1.0f64, beta in 0.25..4.0f64, s1 in -2.0..2.0f64,
                                 s0 in -2.0..2.0f64, t in 0.01..2.0f64) {
        let c = f_sigma(&params(alpha, beta, s1, s0, t), t, 1e-10).unwrap();
        prop_assert!(c.f_sigma <= c.upper_bound + 1e-10 * c.upper_bound.max(1.0));
        prop_assert!(c.f_sigma >= 0.0);
        prop_assert!(c.tail_bound <= 1e-10);
        let b = f_sigma_upper_bound(alpha, beta, s1, s0, t).unwrap();
        prop_assert_eq!(b, c.upper_bound);
    }

    #[test]
    fn covariance_is_symmetric_and_cauchy_schwarz(t1 in 0.05..1.0f64, t2 in 0.05..1.0f64, alpha in -0.5..1.0f64) {
        let p = params(alpha, 1.0, 0.8, 0.3, 1.0);
        let fs = FSigma::from_params(&p).unwrap();
        let c12 = limit_covariance(&p, &fs, t1, t2, 1e-10).unwrap();
        let c21 = limit_covariance(&p, &fs, t2, t1, 1e-10).unwrap();
        let c11 = limit_covariance(&p, &fs, t1, t1, 1e-10).unwrap();
        let c22 = limit_covariance(&p, &fs, t2, t2, 1e-10).unwrap();
        prop_assert!((c12 - c21).abs() <= 1e-12 * c12.abs().max(1.0));
        prop_assert!(c12 * c12 <= c11 * c22 * (1.0 + 1e-9));
    }
}

#[test]
fn pure_multiplicative_closed_form() {
    // sigma0 = 0: f_k = sigma1^{2k} e^{-2 alpha t} (t / 4 beta)^{k/2} / Gamma(k/2 + 1)
    let (alpha, beta, s1, t) = (0.4, 1.7, 1.3, 0.8);
    let p = params(alpha, beta, s1, 0.0, 1.0);
    for k in 1..=15 {
        let kf = k as f64;
        let exact = s1.powi(2 * k as i32) * (-2.0 * alpha * t).exp() * (t / (4.0 * beta)).powf(kf / 2.0) / gamma(kf / 2.0 + 1.0);
        let got = f_k_closed(&p, k, t).unwrap();
        assert!((got - exact).abs() <= 1e-12 * exact, "k={k}");
    }
}

#[test]
fn chen_identity() {
    let p = params(0.0, 1.0, 1.0, 0.0, 4.0);
    for t in [0.25, 1.0, 2.0, 4.0] {
        let c = f_sigma(&p, t, 1e-12).unwrap();
        assert!((c.f_sigma - chen_f(t).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn oracle_agrees_with_closed_form() {
    let p = params(0.3, 0.8, 1.1, -0.4, 1.0);
    for k in 1..=4 {
        let exact = f_k_closed(&p, k, 0.6).unwrap();
        let est = f_k_oracle(&p, k, 0.6, 200_000, 17 + k as u64).unwrap();
        assert!((est.mean - exact).abs() < 4.0 * est.std_error, "k={k}: {} vs {exact} ± {}", est.mean, est.std_error);
    }
}

#[test]
fn nonaffine_sigma_is_unsupported() {
    let p = ModelParams::new(0.0, 1.0, 8.0, 1.0, Boundary::Neumann, Sigma::named(cable_core::NamedSigma::Tanh)).unwrap();
    assert!(matches!(f_k_closed(&p, 1, 0.5), Err(cable_core::Error::Unsupported(_))));
}
