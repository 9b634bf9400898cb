use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pwm_qoc::experiment::{read_bench_csv, ExperimentSummary, Scheme, SmoothReport};
use pwm_qoc::optimize::Status;
use pwm_qoc::pulse::{PwmConfig, PwmTrain, Layout};

fn qoc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qoc")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn transform_sine_preset_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = qoc(&["transform", "--preset", "sine", "--intervals", "1000", "--out", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let train = PwmTrain::load(&dir.path().join("train.json")).unwrap();
    let c = &train.controls[0];
    let (amp, w) = (2.0 * PI * 50e3, 2.0 * PI * 50e3);
    let tau = 20e-6 / 1000.0;
    for k in 0..1000 {
        let (a, b) = (k as f64 * tau, (k + 1) as f64 * tau);
        let area = amp / w * ((w * a).cos() - (w * b).cos());
        assert!((c.eps * c.widths[k] - area).abs() <= 1e-12 * c.eps * tau);
    }
    let spectrum = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(spectrum.starts_with("frequency_hz,magnitude"));
}

#[test]
fn transform_zero_signal_gives_zero_train() {
    let dir = tempfile::tempdir().unwrap();
    let out = qoc(&["transform", "--preset", "zero", "--intervals", "16", "--out", path(dir.path())]);
    assert!(out.status.success());
    let train = PwmTrain::load(&dir.path().join("train.json")).unwrap();
    assert!(train.controls[0].widths.iter().all(|&w| w == 0.0));
}

#[test]
fn transform_over_amplitude_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("u.csv");
    fs::write(&csv, "t,u\n0,0\n1e-6,0\n2e-6,1e9\n3e-6,0\n4e-6,0\n").unwrap();
    let out = qoc(&[
        "transform", "--signal", path(&csv), "--horizon", "4e-6", "--intervals", "4", "--eps", "1e6", "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("amplitude bound violated at interval 2"), "{err}");
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"experiment": "custom", "intervals": 0}"#).unwrap();
    let out = qoc(&["optimize", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = qoc(&["optimize", "--preset", "no-such-thing"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qoc(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimize_custom_toy_and_repeat_identically() {
    let run = |dir: &Path| {
        let out = qoc(&["optimize", "--preset", "custom", "--seed", "5", "--out", path(dir)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read_to_string(dir.join("summary.json")).unwrap()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run(a.path());
    assert_eq!(first, run(b.path()));
    let summary: ExperimentSummary = serde_json::from_str(&first).unwrap();
    assert_eq!(summary.runs[0].seed, 5);
    assert_eq!(summary.runs[0].status, Status::Converged);
    assert!(summary.best_infidelity <= 1e-6);
    assert!(a.path().join("best_train.json").exists());
    assert!(a.path().join("trace-5.csv").exists());
}

#[test]
fn bench_with_drift_only_drive_needs_one_interval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("grid.json");
    fs::write(
        &cfg,
        r#"{"horizons": [1e-6, 2e-6], "exponents": [1, 3],
            "drive": {"num_spins": 2, "amplitude": 0.0, "frequency": 50000.0}}"#,
    )
    .unwrap();
    let out = qoc(&["bench", "--config", path(&cfg), "--out", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cells = read_bench_csv(fs::File::open(dir.path().join("bench.csv")).unwrap()).unwrap();
    assert_eq!(cells.len(), 8);
    assert!(cells.iter().all(|c| c.m_required == Some(1) && c.cpu_median_s.is_some()));
    // sorted by scheme, then T, then target
    assert!(cells[..4].iter().all(|c| c.scheme == Scheme::Pwm));
    assert_eq!(cells[0].horizon, 1e-6);
    assert!(cells[0].target_if > cells[1].target_if);
}

#[test]
fn smooth_zero_train_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PwmConfig::from_horizon(10e-3, 2000, Layout::Centered).unwrap();
    let train = PwmTrain::zeros(cfg, &[2.0 * PI * 2e6]).unwrap();
    let file = dir.path().join("zero.json");
    train.save(&file).unwrap();
    for method in ["anti-pwm", "gaussian"] {
        let out = qoc(&["smooth", "--train", path(&file), "--method", method, "--out", path(dir.path())]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let report: SmoothReport =
            serde_json::from_str(&fs::read_to_string(dir.path().join("smooth_report.json")).unwrap()).unwrap();
        assert!(report.difference.abs() < 1e-12, "{method}: {}", report.difference);
        assert!(dir.path().join("smoothed-0.csv").exists());
    }
}

#[test]
fn smooth_missing_file_exits_2() {
    let out = qoc(&["smooth", "--train", "/no/such/train.json"]);
    assert_eq!(out.status.code(), Some(2));
}
