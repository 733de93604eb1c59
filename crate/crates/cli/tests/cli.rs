use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn multierg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multierg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn shipped(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.report.json"))).unwrap())
        .unwrap()
}

const SMALL: &str = r#"{
  "name": "small",
  "family": [{"kind": "rotation", "alpha": {"surd": {"a": "0", "b": "1", "m": 2}}},
             {"kind": "rotation", "alpha": {"surd": {"a": "0", "b": "1", "m": 3}}}],
  "observables": [{"kind": "frac_part"}, {"kind": "frac_part"}],
  "x0": 0.3,
  "schedule": {"n_max": 20000},
  "tolerance": 0.01
}"#;

#[test]
fn shipped_distinct_rotations_passes() {
    let out = tempfile::tempdir().unwrap();
    let o = multierg(&[
        "run",
        &shipped("distinct-rotations.json"),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report = read_report(out.path(), "distinct-rotations");
    assert_eq!(report["prediction"]["value"], 0.25);
    assert_eq!(report["comparison"]["pass"], true);
    assert_eq!(report["status"], "pass");
}

#[test]
fn trace_csv_has_fixed_columns_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let file = write_scenario(tmp.path(), "small", SMALL);
    let mut bodies = Vec::new();
    for (sub, workers) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let dir = tmp.path().join(sub);
        let o = multierg(&[
            "run",
            &file,
            "--out",
            dir.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert_eq!(o.status.code(), Some(0));
        bodies.push(std::fs::read_to_string(dir.join("small.trace.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    assert_eq!(bodies[0], bodies[2]);
    let mut lines = bodies[0].lines();
    assert_eq!(lines.next(), Some("N,value,est_tail"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.last().unwrap().split(',').next(), Some("20000"));
    assert!(rows.iter().all(|r| r.split(',').count() == 3));
}

#[test]
fn constant_observable_gives_a_flat_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SMALL.replace("\"small\"", "\"flat\"").replace(
        r#"[{"kind": "frac_part"}, {"kind": "frac_part"}]"#,
        r#"[{"kind": "constant", "value": 0.5}, {"kind": "constant", "value": 0.5}]"#,
    );
    let file = write_scenario(tmp.path(), "flat", &body);
    let o = multierg(&["run", &file, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("flat.trace.csv")).unwrap();
    assert!(
        csv.lines()
            .skip(1)
            .all(|l| l.split(',').nth(1) == Some("0.25")),
        "{csv}"
    );
    assert_eq!(
        read_report(tmp.path(), "flat")["comparison"]["final_error"],
        0.0
    );
}

#[test]
fn negative_control_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SMALL.replace(
        "\"tolerance\": 0.01",
        "\"tolerance\": 0.002, \"expected\": 0.3",
    );
    let file = write_scenario(tmp.path(), "small", &body);
    let o = multierg(&["run", &file, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report = read_report(tmp.path(), "small");
    assert_eq!(report["status"], "fail");
    assert_eq!(report["comparison"]["predicted"], 0.3);
}

#[test]
fn inapplicable_prediction_still_writes_a_report() {
    let out = tempfile::tempdir().unwrap();
    let o = multierg(&[
        "run",
        &shipped("identity-correlation.json"),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report = read_report(out.path(), "identity-correlation");
    assert_eq!(report["status"], "no_prediction");
    assert_eq!(report["measured"], 0.5);
    assert!(!report["prediction"]["caveats"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn io_and_parse_failures_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = multierg(&["run", tmp.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let file = write_scenario(tmp.path(), "small", SMALL);
    let blocker = tmp.path().join("not-a-dir");
    std::fs::write(&blocker, "").unwrap();
    let o = multierg(&["run", &file, "--out", blocker.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let bad = write_scenario(
        tmp.path(),
        "bad",
        &SMALL.replace("\"x0\": 0.3", "\"x0\": 3"),
    );
    let o = multierg(&["run", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("$.x0"));
}

#[test]
fn predict_prints_the_derivation() {
    let o = multierg(&["predict", &shipped("repeated-rotation.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["derivation"][0]["kind"], "group_integral");
}

#[test]
fn verify_quick_passes_and_tiny_n_fails() {
    let o = multierg(&["verify", "--quick", "--workers", "2"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 12);

    let o = multierg(&["verify", "--nmax", "100"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        text.lines()
            .any(|l| l.starts_with("[FAIL]") && l.contains("tail")),
        "{text}"
    );
}
