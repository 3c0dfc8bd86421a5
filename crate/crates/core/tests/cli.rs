use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hcn-sim");

const SMALL: &str = r#"
[sweep]
densities = [0.0, 40.0, 120.0]
n_samples = 6
"#;

fn hcn(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("HCN_SIM_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn validate_rejects_negative_count_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[layout]\nn_rsbs = -1\n");
    let out = hcn(&["validate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("layout.n_rsbs"), "{err}");
}

#[test]
fn validate_accepts_defaults() {
    let out = hcn(&["validate"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok:"));
}

#[test]
fn validate_reports_unreadable_and_malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(hcn(&["validate", missing.to_str().unwrap()]).status.code(), Some(2));
    let cfg = write(dir.path(), "typo.toml", "[sweep]\nsamples = 4\n");
    let out = hcn(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("samples"));
}

#[test]
fn empty_density_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.toml", "[sweep]\ndensities = []\n");
    let out = hcn(&["run", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep.densities"));
}

#[test]
fn run_writes_metrics_echo_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out_dir = dir.path().join("out");
    let out = hcn(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# hcn-sim metrics schema v"));
    assert_eq!(
        lines[1],
        "scheme,lambda_e,density,grid_power_w,grid_power_stderr,sum_rate_bps,sum_rate_stderr,ee_bits_per_joule,ee_stderr,unconverged_frac,unserved_frac,samples"
    );
    // 3 schemes x 2 harvest rates x 3 densities.
    assert_eq!(lines.len(), 2 + 18);
    assert!(lines[2].starts_with("nearest_bs,44,0,"), "{}", lines[2]);
    assert!(lines.iter().skip(2).all(|l| l.ends_with(",6")));

    for name in ["config.echo.toml", "power.csv", "throughput.csv", "ee.csv", "power.gp", "throughput.gp", "ee.gp"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = hcn(&["run", &cfg, "--samples", "5", "--seed", "7", "--out", d.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(a.join("metrics.csv")).unwrap(), fs::read(b.join("metrics.csv")).unwrap());
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let one = dir.path().join("one");
    let four = dir.path().join("four");
    assert!(hcn(&["run", &cfg, "--threads", "1", "--out", one.to_str().unwrap()]).status.success());
    let out = Command::new(BIN)
        .args(["run", &cfg, "--out", four.to_str().unwrap()])
        .env("HCN_SIM_THREADS", "4")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(one.join("metrics.csv")).unwrap(), fs::read(four.join("metrics.csv")).unwrap());
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let first = dir.path().join("first");
    let out = hcn(&[
        "run",
        &cfg,
        "--samples",
        "4",
        "--seed",
        "99",
        "--scheme",
        "joint,proposed_joint",
        "--deterministic-fading",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let echo = first.join("config.echo.toml");
    let second = dir.path().join("second");
    let out = hcn(&["run", "--config", echo.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(out.status.success());
    let a = fs::read_to_string(first.join("metrics.csv")).unwrap();
    let b = fs::read_to_string(second.join("metrics.csv")).unwrap();
    assert_eq!(a, b);
    assert!(!a.contains("nearest_bs"));
}

#[test]
fn oracle_subcommand_passes() {
    let out = hcn(&["oracle", "--cases", "100"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4, "{text}");
}
