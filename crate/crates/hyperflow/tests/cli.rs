use std::path::{Path, PathBuf};
use std::process::Command;

use hyperflow::cli::run;
use hyperflow::flows::parse_trajectory_csv;
use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["hyperflow"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_scenario(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn quarter_turn_of_the_rotation_scenario() {
    let path = scenario("rotation.json");
    let (code, out, _) = invoke(&["flow", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let table = parse_trajectory_csv(&out).unwrap();
    let last = table.rows.last().unwrap();
    let want = [std::f64::consts::FRAC_PI_2, 0.0, -1.0, 0.0, 0.0];
    for (got, want) in last.iter().zip(want) {
        assert!((got - want).abs() < 1e-12, "{last:?}");
    }
    assert_eq!(table.header.last().unwrap(), "Q3");
}

#[test]
fn symmetry_report_for_two_blocks() {
    let path = scenario("two_blocks.json");
    let (code, out, _) = invoke(&["symmetry", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["dimension"], 11);
    assert_eq!(v["commutant_dimension"], 10);
    assert!(v["closure_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn invariants_are_conserved_and_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("radial_oscillator.json");
    let (code, _, _) = invoke(&[
        "invariants",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("invariants.json")).unwrap()).unwrap();
    assert_eq!(v["ok"], true);
    assert!(v["max_drift"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["trajectories"].as_array().unwrap().len(), 3);
}

#[test]
fn simulate_writes_one_csv_per_initial_condition() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("radial_oscillator.json");
    let (code, _, _) = invoke(&[
        "simulate",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--t-end",
        "1",
    ]);
    assert_eq!(code, 0);
    for i in 0..3 {
        let text = std::fs::read_to_string(dir.path().join(format!("simulate_{i}.csv"))).unwrap();
        let table = parse_trajectory_csv(&text).unwrap();
        assert_eq!(table.rows.last().unwrap()[0], 1.0);
    }
    assert!(dir.path().join("simulate_invariants.json").exists());
}

#[test]
fn json_trajectories() {
    let path = scenario("dirac.json");
    let (code, out, _) = invoke(&["flow", "--scenario", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let trajs = v["trajectories"].as_array().unwrap();
    assert_eq!(trajs.len(), 2);
    assert_eq!(trajs[0]["states"][0].as_array().unwrap().len(), 4);
}

#[test]
fn verify_and_reduce_a_rotated_structure() {
    let path = scenario("rotated_structure.json");
    let (code, out, _) = invoke(&["verify", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["orientations"][0], "negative");
    let (code, out, _) = invoke(&["reduce", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["ok"], true);
}

#[test]
fn detect_accepts_oscillators_and_rejects_dilations() {
    let path = scenario("two_blocks.json");
    let (_, out, _) = invoke(&["detect", "--scenario", path.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "oscillator");
    let path = scenario("detect_dilation.json");
    let (code, out, _) = invoke(&["detect", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "not_oscillator");
}

#[test]
fn validation_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(
        dir.path(),
        r#"{"n": 1, "signature": ["positive"], "profile": {"c": "(1, 0, 0)"},
            "initial_conditions": [[1, 0, 0, 0]], "time": {"t_end": 1, "dt": 0}}"#,
    );
    let (code, out, err) = invoke(&["flow", "--scenario", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], "validation");
    assert_eq!(v["field"], "time.dt");

    let p = write_scenario(dir.path(), r#"{"n": 1, "signature": ["sideways"]}"#);
    let (code, _, err) = invoke(&["verify", "--scenario", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["field"], "signature[0]");
}

#[test]
fn unknown_command_is_a_usage_error() {
    let (code, _, err) = invoke(&["teleport"]);
    assert_eq!(code, 64);
    assert!(err.contains("Usage"));
    let (code, _, _) = invoke(&["flow"]);
    assert_eq!(code, 64);
}

#[test]
fn seeded_runs_are_deterministic() {
    let path = scenario("two_blocks.json");
    let a = invoke(&["detect", "--scenario", path.to_str().unwrap(), "--seed", "7"]);
    let b = invoke(&["detect", "--scenario", path.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(a, b);
    let path = scenario("radial_oscillator.json");
    let a = invoke(&["simulate", "--scenario", path.to_str().unwrap(), "--t-end", "2"]);
    let b = invoke(&["simulate", "--scenario", path.to_str().unwrap(), "--t-end", "2"]);
    assert_eq!(a, b);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hyperflow");
    let status = Command::new(bin).arg("bogus").output().unwrap().status;
    assert_eq!(status.code(), Some(64));
    let out = Command::new(bin)
        .args(["symmetry", "--scenario", scenario("two_blocks.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn shipped_scenarios_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        hyperflow::cli::Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
