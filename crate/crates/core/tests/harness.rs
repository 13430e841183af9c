use cable_core::harness::{
    emit_report, execute, parse_csv_report, parse_json_report, run_experiment, Check, Experiment, ExperimentConfig,
    ReportFormat, RunManifest, SigmaKind, MANIFEST_FILE, SAMPLES_FILE, SUMMARY_FILE,
};
use cable_core::{Boundary, Error};
use proptest::prelude::*;

fn small(experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        domain_length: 4.0,
        horizon: 0.5,
        l_list: vec![2.0, 4.0, 8.0],
        times: vec![0.25, 0.5],
        n_rep: 1000,
        n_points: 20,
        oracle_samples: 20_000,
        oracle_param_sets: 1,
        oracle_max_order: 2,
        bound_draws: 20,
        permutations: 20,
        increment_base: 0.2,
        increment_steps: vec![0.05, 0.1, 0.2],
        increment_fixed_step: 0.1,
        ..ExperimentConfig::new(experiment)
    }
}

fn float() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, -1e-6..1e-6f64, Just(0.0), Just(1e-300)]
}

prop_compose! {
    fn config()(exp in 0..6usize, alpha in float(), beta in float(), len in float(), horizon in float(),
                bc in 0..3usize, sigma in 0..4usize, s1 in float(), s0 in float(),
                l_list in proptest::collection::vec(float(), 0..5), times in proptest::collection::vec(float(), 0..5),
                n_rep in 0..100_000usize, seed in any::<u64>(), tol in float(), out in proptest::option::of("[a-z]{1,8}"))
               -> ExperimentConfig {
        ExperimentConfig {
            experiment: Experiment::ALL[exp],
            alpha, beta, domain_length: len, horizon,
            boundary: Boundary::ALL[bc],
            sigma: [SigmaKind::Affine, SigmaKind::Sin, SigmaKind::Tanh, SigmaKind::SqrtOnePlusSquare][sigma],
            sigma1: s1, sigma0: s0, l_list, times, n_rep, seed, kernel_tol: tol,
            out_dir: out.map(Into::into),
            ..ExperimentConfig::default()
        }
    }
}

proptest! {
    #[test]
    fn config_round_trips(cfg in config()) {
        let text = cfg.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash().unwrap(), cfg.hash().unwrap());
    }
}

#[test]
fn defaults_fill_missing_keys() {
    let cfg = ExperimentConfig::from_toml("experiment = \"clt-scan\"\nn_rep = 12000\n").unwrap();
    assert_eq!(cfg.experiment, Experiment::CltScan);
    assert_eq!(cfg.n_rep, 12000);
    assert_eq!(cfg.max_dx, 0.1);
    assert_eq!(cfg.stability_ratio, 0.25);
    assert_eq!(cfg.kernel_tol, 1e-8);
    assert!(ExperimentConfig::from_toml("bogus_key = 1").is_err());
}

#[test]
fn validation_rejects_before_compute() {
    let bad = [
        ExperimentConfig { beta: -1.0, ..small(Experiment::KernelCheck) },
        ExperimentConfig { stability_ratio: 0.3, ..small(Experiment::VarianceScan) },
        ExperimentConfig { times: vec![0.7], ..small(Experiment::VarianceScan) },
        ExperimentConfig { l_list: vec![4.0, 8.0], ..small(Experiment::CltScan) },
        ExperimentConfig { n_rep: 10, ..small(Experiment::FcltCompare) },
        ExperimentConfig { sigma: SigmaKind::Tanh, ..small(Experiment::ChaosEval) },
        ExperimentConfig { increment_fixed_step: 0.4, ..small(Experiment::IncrementScan) },
    ];
    for cfg in bad {
        let err = execute(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }
}

#[test]
fn numerical_failure_is_recorded() {
    let cfg = ExperimentConfig {
        alpha: -60.0,
        sigma1: 0.0,
        sigma0: 0.0,
        l_list: vec![4.0],
        times: vec![0.5],
        n_rep: 100,
        ..small(Experiment::VarianceScan)
    };
    let out = execute(&cfg).unwrap();
    let failure = out.manifest.failure.as_ref().unwrap();
    assert_eq!(failure.module, "solver");
    assert_eq!(failure.replicate, Some(0));
    assert_eq!(out.manifest.exit_code(), 3);
    assert!(!out.manifest.passed);
}

#[test]
fn run_writes_files_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(Experiment::FcltCompare);
    cfg.out_dir = Some(dir.path().join("a"));
    let first = run_experiment(&cfg).unwrap();
    cfg.out_dir = Some(dir.path().join("b"));
    let second = run_experiment(&cfg).unwrap();
    let read = |sub: &str, f: &str| std::fs::read(dir.path().join(sub).join(f)).unwrap();
    assert_eq!(read("a", SAMPLES_FILE), read("b", SAMPLES_FILE));
    assert_eq!(read("a", SUMMARY_FILE), read("b", SUMMARY_FILE));
    assert_eq!(first.checks, second.checks);
    let samples = String::from_utf8(read("a", SAMPLES_FILE)).unwrap();
    let mut lines = samples.lines();
    assert_eq!(lines.next(), Some("experiment,L,t,replicate,value"));
    assert_eq!(lines.count(), 1000 * 2);
    let manifest: RunManifest = serde_json::from_slice(&read("a", MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.checks, first.checks);
    assert_eq!(manifest.config_hash, cfg.hash().unwrap());
}

fn sample_manifest() -> RunManifest {
    let checks = vec![
        Check::new("covariance (0.25, 0.5)", "Theorem 2")
            .measured(0.123_456_789_012_345_67, 1.0 / 3.0)
            .note("with, commas and \"quotes\"")
            .within(0.1, 0.07),
        Check::new("tiny", "Theorem 2").measured(5e-324, 0.0).at_most(1e308, 0.0),
        Check::new("negative", "Theorem 2").measured(-2.5e-17, 0.1).at_least(-0.3, 0.0),
    ];
    RunManifest {
        experiment: "fclt-compare".into(),
        config_hash: "ab".repeat(32),
        code_version: "cable-core 0.1.0".into(),
        started: "2026-01-01T00:00:00.000Z".into(),
        finished: "2026-01-01T00:00:01.000Z".into(),
        seed: 7,
        n_rep: 4000,
        passed: true,
        checks,
        failure: None,
    }
}

#[test]
fn json_csv_json_round_trip_is_exact() {
    let manifests = vec![sample_manifest(), RunManifest { seed: 8, ..sample_manifest() }];
    let json = emit_report(&manifests, ReportFormat::Json).unwrap();
    let from_json = parse_json_report(&json).unwrap();
    assert_eq!(from_json, manifests);
    let csv = emit_report(&from_json, ReportFormat::Csv).unwrap();
    let from_csv = parse_csv_report(&csv).unwrap();
    assert_eq!(from_csv, manifests);
    assert_eq!(emit_report(&from_csv, ReportFormat::Json).unwrap(), json);
    for (a, b) in from_csv[0].checks.iter().zip(&manifests[0].checks) {
        assert_eq!(a.measured.to_bits(), b.measured.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
    assert!(json.contains("\"measured\": 1.2345678901234566e-1,"));
}

#[test]
fn report_errors() {
    assert!(matches!(emit_report(&[], ReportFormat::Json), Err(Error::Usage(_))));
    assert!(matches!("yaml".parse::<ReportFormat>(), Err(Error::Usage(_))));
    assert_eq!("markdown-summary".parse::<ReportFormat>().unwrap(), ReportFormat::MarkdownSummary);
}

#[test]
fn markdown_cites_the_claim_per_row() {
    let out = execute(&small(Experiment::FcltCompare)).unwrap();
    let md = emit_report(&[out.manifest.clone()], ReportFormat::MarkdownSummary).unwrap();
    let rows: Vec<&str> = md.lines().filter(|l| l.starts_with("| covariance") || l.starts_with("| energy")).collect();
    assert_eq!(rows.len(), out.manifest.checks.len());
    assert!(rows.iter().all(|r| r.contains("| Theorem 2 |")));
}

#[test]
fn every_experiment_runs_at_small_scale() {
    for exp in Experiment::ALL {
        let out = execute(&small(exp)).unwrap();
        assert!(out.manifest.failure.is_none(), "{exp}: {:?}", out.manifest.failure);
        assert!(!out.manifest.checks.is_empty(), "{exp}");
        for c in &out.manifest.checks {
            assert!(c.measured.is_finite(), "{exp}: {}", c.name);
        }
    }
}

#[test]
fn nonlinear_sigma_uses_tabulated_limit() {
    let cfg = ExperimentConfig {
        sigma: SigmaKind::Sin,
        l_list: vec![8.0],
        ..small(Experiment::VarianceScan)
    };
    let out = execute(&cfg).unwrap();
    assert!(out.manifest.failure.is_none());
    assert!(out.manifest.checks[0].note.contains("tabulated"));
    assert!(out.manifest.checks[0].reference > 0.0);
}
