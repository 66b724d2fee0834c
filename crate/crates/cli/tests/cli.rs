use std::path::{Path, PathBuf};
use std::process::Command;

use frs_cli::RunResult;

fn manifest(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("manifests").join(name)
}

fn frs(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_frs")).args(args).output().expect("binary runs")
}

fn run_manifest(command: &str, name: &str, out: &Path) -> (i32, RunResult) {
    let o = frs(&[command, "--manifest", manifest(name).to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(out.join("result.json")).expect("result written");
    (o.status.code().unwrap(), serde_json::from_str(&text).expect("result parses"))
}

#[test]
fn bures_example() {
    let dir = tempfile::tempdir().unwrap();
    let (code, result) = run_manifest("bures", "bures.json", dir.path());
    assert_eq!(code, 0);
    match result {
        RunResult::Bures { bures_sq, .. } => assert!((bures_sq - 2.0).abs() < 1e-14),
        other => panic!("unexpected {other:?}"),
    }
    assert!(dir.path().join("metadata.json").exists());
}

#[test]
fn gaussian_example() {
    let dir = tempfile::tempdir().unwrap();
    let (code, result) = run_manifest("w2-gaussian", "w2-gaussian.json", dir.path());
    assert_eq!(code, 0);
    match result {
        RunResult::W2Gaussian { w2_sq, mean_part, .. } => {
            assert!((w2_sq - (6.0 - 2.0 * 3f64.sqrt())).abs() < 1e-13);
            assert_eq!(mean_part, 2.0);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn heatflow_final_state() {
    let dir = tempfile::tempdir().unwrap();
    let (code, result) = run_manifest("heatflow", "heatflow.json", dir.path());
    assert_eq!(code, 0);
    let RunResult::Heatflow { final_state, .. } = result else { panic!("wrong result") };
    assert!((final_state[0].get(0, 0) - 1.183940).abs() < 1e-6);
    assert!((final_state[0].get(1, 1) - 0.816060).abs() < 1e-6);

    let series = std::fs::read_to_string(dir.path().join("heatflow.csv")).unwrap();
    assert_eq!(series.lines().next().unwrap(), "t,entropy,fisher,dissipation_residual");
    assert_eq!(series.lines().count(), 2002);

    // final row of the state series carries the same state
    let states = std::fs::read_to_string(dir.path().join("heatflow_states.csv")).unwrap();
    let last: Vec<f64> = states.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 2.0);
    assert!((last[2] - 1.183940).abs() < 1e-6);
    assert!((last[5] - 0.816060).abs() < 1e-6);
}

#[test]
fn gamma_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let (code, result) = run_manifest("gamma-sweep", "gamma-sweep.json", dir.path());
    assert_eq!(code, 0);
    let RunResult::GammaSweep { gaps_positive, gaps_strictly_decreasing, sweep } = result else { panic!("wrong result") };
    assert!(gaps_positive && gaps_strictly_decreasing);
    assert_eq!(sweep.rows.len(), 4);
    let csv = std::fs::read_to_string(dir.path().join("gamma-sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn geodesic_writes_path_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (code, result) = run_manifest("geodesic", "geodesic.json", dir.path());
    assert_eq!(code, 0);
    let RunResult::Geodesic { report, convexity_violation } = result else { panic!("wrong result") };
    assert!(report.converged);
    assert!(convexity_violation.unwrap() <= 1e-2);
    let csv = std::fs::read_to_string(dir.path().join("geodesic_states.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,cell_id,a_0_0,lambda_min");
    // 65 knots × 2 cells
    assert_eq!(csv.lines().count(), 1 + 65 * 2);
}

#[test]
fn results_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, name) in [("schrodinger", "schrodinger.json"), ("geodesic", "hellinger.json"), ("heatflow", "heatflow.json")] {
        let out = dir.path().join(cmd);
        let (code, parsed) = run_manifest(cmd, name, &out);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(out.join("result.json")).unwrap();
        let again = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
        assert_eq!(again, text, "{cmd}");
    }
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"version\": \"1\",\n \"command\": \"bures\",\n \"endpoints\": 3}").unwrap();
    let o = frs(&["bures", "--manifest", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    // command mismatch
    let o = frs(&["geodesic", "--manifest", manifest("bures.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // indefinite endpoint
    std::fs::write(
        &bad,
        r#"{"version": "1", "command": "bures",
            "endpoints": {"kind": "explicit", "a0": [[[1, 0], [0, -1]]], "a1": [[[1, 0], [0, 1]]]}}"#,
    )
    .unwrap();
    let o = frs(&["bures", "--manifest", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // off-mass endpoints in unit-mass mode
    std::fs::write(
        &bad,
        r#"{"version": "1", "command": "geodesic",
            "endpoints": {"kind": "explicit", "a0": [[[3]]], "a1": [[[1]]]}}"#,
    )
    .unwrap();
    let o = frs(&["geodesic", "--manifest", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = frs(&["geodesic"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_3_and_keeps_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("short.json");
    std::fs::write(
        &m,
        r#"{"version": "1", "command": "geodesic", "grid": {"cells": 4, "dim": 2},
            "endpoints": {"kind": "generator", "seed": 1, "eigen_range": [0.2, 5]},
            "solver": {"max_iter": 3}}"#,
    )
    .unwrap();
    let o = frs(&["geodesic", "--manifest", m.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let text = std::fs::read_to_string(dir.path().join("result.json")).unwrap();
    let RunResult::Geodesic { report, .. } = serde_json::from_str(&text).unwrap() else { panic!("wrong result") };
    assert!(!report.converged);
}

#[test]
fn check_passes_and_detects_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = frs(&["check", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let o = frs(&["check", "--out", out, "--inject-fault"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("dynamics       FAIL"));
}

#[test]
fn thread_cap_is_respected() {
    let dir = tempfile::tempdir().unwrap();
    let o = frs(&["bures", "--manifest", manifest("bures.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["threads"], 2);
}
