//! End-to-end checks of the `coupled-de` binary: flag handling, exit
//! statuses, config-file merging, and byte-level reproducibility of the
//! emitted files.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coupled-de"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn help_exits_clean() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for cmd in [
        "threshold",
        "exit-curve",
        "gexit-curve",
        "acpr",
        "sw-region",
        "mac-threshold",
        "mac-acpr",
    ] {
        assert!(text.contains(cmd), "help lists {cmd}");
    }
}

#[test]
fn malformed_ensemble_is_a_usage_error() {
    let out = run(&[
        "threshold",
        "--ensemble",
        "4,",
        "--punctured",
        "--source",
        "erasure:0.5",
        "--channel",
        "bec",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("ensemble"), "error names the flag");
}

#[test]
fn puncturing_must_be_acknowledged() {
    let out = run(&[
        "threshold",
        "--ensemble",
        "4,6",
        "--source",
        "erasure:0.5",
        "--channel",
        "bec",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--punctured"));
}

#[test]
fn erasure_threshold_matches_the_fixed_point() {
    let out = run(&[
        "threshold",
        "--ensemble",
        "4,6",
        "--punctured",
        "--source",
        "erasure:0.5",
        "--channel",
        "bec",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let value = text
        .split("threshold=")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse::<f64>().ok())
        .unwrap_or_else(|| panic!("summary carries threshold=: {text}"));
    assert!((value - 0.331724).abs() <= 5e-4, "threshold {value}");
}

#[test]
fn repeat_runs_emit_identical_bytes() {
    // The emitted file embeds its own path in the metadata trailer, so the
    // reruns write to the same location and the bytes are captured between.
    let dir = tempfile::tempdir().unwrap();
    let region_path = dir.path().join("sw.csv");
    let region = || {
        let out = run(&[
            "sw-region",
            "--source",
            "erasure:0.5",
            "--channel",
            "bec",
            "--delta",
            "0.05",
            "--out",
            region_path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        read(&region_path)
    };
    assert_eq!(region(), region());

    let curve_path = dir.path().join("exit.csv");
    let curve = || {
        let out = run(&[
            "exit-curve",
            "--ensemble",
            "4,6",
            "--punctured",
            "--source",
            "erasure:0.5",
            "--channel",
            "bec",
            "--samples",
            "200",
            "--out",
            curve_path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        read(&curve_path)
    };
    let first = curve();
    assert_eq!(first, curve());
    assert!(first.starts_with("x,channel_param,exit_value\n"));
    assert!(first.contains("# coupled-de"));
}

#[test]
fn gexit_failure_reports_partial_results() {
    // An entropy target of 0.9 cannot be reached when the continuation is
    // capped at h = 0.5, so the run must keep what it produced, warn, and
    // exit with the analysis-failure status.
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("gexit.csv");
    let out = run(&[
        "gexit-curve",
        "--ensemble",
        "4,6",
        "--punctured",
        "--source",
        "bsc:0.1",
        "--channel",
        "bawgnc",
        "--targets",
        "0.9",
        "--h-max",
        "0.5",
        "--grid-max",
        "16",
        "--bins",
        "256",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("warning"), "stderr: {}", stderr(&out));
    assert!(out_path.exists(), "partial curve is retained");
    assert!(read(&out_path).starts_with("x,channel_param,exit_value\n"));
}

#[test]
fn mac_sample_floor_is_enforced() {
    let out = run(&["mac-threshold", "--ensemble", "3,6", "--mc", "5000"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("mc_samples"), "stderr: {}", stderr(&out));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(
        &cfg_path,
        "# defaults for the erasure curve\n\
         ensemble = 4,6\n\
         punctured = true\n\
         source = erasure:0.5\n\
         channel = bec\n\
         samples = 50\n",
    )
    .unwrap();
    let out_path = dir.path().join("curve.csv");
    let out = run(&[
        "exit-curve",
        "--config",
        cfg_path.to_str().unwrap(),
        "--samples",
        "10",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    // The flag value overrides the file's samples = 50.
    assert!(stdout(&out).contains("samples=10"), "got: {}", stdout(&out));
    assert!(out_path.exists());
}

#[test]
fn config_file_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.cfg");
    std::fs::write(&cfg_path, "ensemble = 4,6\nfrobnicate = 1\n").unwrap();
    let out = run(&[
        "exit-curve",
        "--config",
        cfg_path.to_str().unwrap(),
        "--punctured",
        "--source",
        "erasure:0.5",
        "--channel",
        "bec",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("frobnicate"));
}
