use std::path::Path;
use std::process::{Command, Output};

fn cable_clt(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cable-clt"))
        .args(args)
        .current_dir(cwd)
        .env_remove("CABLE_CLT_OUT_DIR")
        .output()
        .expect("spawn cable-clt")
}

fn small_kernel_config(dir: &Path) -> String {
    let path = dir.join("kernel.toml");
    std::fs::write(&path, "experiment = \"kernel-check\"\nalpha = 0.3\nn_points = 20\n").unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn kernel_check_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_kernel_config(dir.path());
    let out = dir.path().join("run");
    let o = cable_clt(&["kernel-check", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("# Run summary"));
    assert!(stdout.contains("## kernel-check: PASS"));
    for f in ["manifest.json", "samples.csv", "summary.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
}

#[test]
fn json_format_parses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_kernel_config(dir.path());
    let o = cable_clt(
        &["kernel-check", "--config", &cfg, "--out", "o", "--format", "json", "--seed", "9"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let manifests = cable_core::harness::parse_json_report(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(manifests.len(), 1);
    assert_eq!(manifests[0].seed, 9);
}

#[test]
fn default_output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_kernel_config(dir.path());
    let target = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_cable-clt"))
        .args(["kernel-check", "--config", &cfg])
        .current_dir(dir.path())
        .env("CABLE_CLT_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("manifest.json").is_file());

    let o = cable_clt(&["kernel-check", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("cable-clt-out/manifest.json").is_file());
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_kernel_config(dir.path());
    let cases: Vec<Vec<&str>> = vec![
        vec!["no-such-experiment"],
        vec!["kernel-check", "--config", &cfg, "--format", "xml"],
        vec!["kernel-check", "--config", "missing.toml"],
        vec!["clt-scan", "--reps", "10"],
        vec![],
    ];
    for args in cases {
        let o = cable_clt(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    std::fs::write(dir.path().join("bad.toml"), "alpha = 0.1\nwidth = 3\n").unwrap();
    let o = cable_clt(&["kernel-check", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("width"));
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("blowup.toml"),
        "alpha = -60.0\nsigma1 = 0.0\nsigma0 = 0.0\nl_list = [4.0]\ntimes = [0.5]\nn_rep = 100\n",
    )
    .unwrap();
    let o = cable_clt(&["variance-scan", "--config", "blowup.toml", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("solver"));
    assert!(dir.path().join("o/manifest.json").is_file());
}
