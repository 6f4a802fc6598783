//! End-to-end checks of the binary: exit-code contract and the demo.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cocycle-lab"))
}

#[test]
fn config_parse_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "seed = \"not a number\"").unwrap();
    let status = bin()
        .args(["run", "--suite", "cohomology"])
        .arg("--config")
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Missing config file is also a config error.
    let status = bin()
        .args(["run", "--suite", "cohomology", "--config", "/nonexistent.toml"])
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn window_overflow_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    // A cocycle horizon beyond the half-window cannot be materialized.
    std::fs::write(
        &cfg,
        "[shift_cocycles]\nwindows = [16]\nhorizon = 20\nzeta_window = 16\nzeta_horizon = 4\nhs_window = 16\nhs_truncations = [8, 16, 32]\nlimit_columns = 2\n",
    )
    .unwrap();
    let status = bin()
        .args(["run", "--suite", "shift-cocycles"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn cohomology_suite_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = bin()
        .args(["run", "--suite", "cohomology", "--seed", "7"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report = std::fs::read_to_string(out.join("cohomology_report.txt")).unwrap();
    assert!(report.lines().count() > 10);
    assert!(report.lines().all(|l| l.contains("status=pass")));
}

#[test]
fn demo_inner_prints_summary_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = bin()
        .args([
            "demo-inner",
            "--zeros",
            "0.5",
            "--spectrum",
            "1.3",
            "--window",
            "64",
        ])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("model-space dimension: 1"));
    assert!(stdout.contains("defect index: 1"));
    for plot in [
        "demo_hs_convergence.svg",
        "demo_defect_spectrum.svg",
        "demo_unitary_ring.svg",
    ] {
        let content = std::fs::read_to_string(out.join(plot)).unwrap();
        assert!(content.starts_with("<svg"));
        assert!(content.contains("<!-- data:"));
    }
}

#[test]
fn unknown_suite_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "--suite", "nonsense"])
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
