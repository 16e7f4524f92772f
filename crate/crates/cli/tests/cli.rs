use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn big(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_big")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn error_kind(out: &Output) -> String {
    assert!(!out.status.success());
    let v: Value = serde_json::from_slice(&out.stderr).expect("json on stderr");
    v["error"]["kind"].as_str().expect("kind").to_owned()
}

#[test]
fn sample_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        assert!(big(dir.path(), &["sample", "--n", "50", "--seed", "9", "--out", name]).status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 50);
}

#[test]
fn graph_bandwidth_and_interpolation_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(big(p, &["sample", "--n", "40", "--seed", "1", "--out", "pts.csv"]).status.success());

    assert!(big(p, &["build-graph", "--points", "pts.csv", "--sigma", "0.5", "--out", "g"]).status.success());
    let header: Value = serde_json::from_str(&std::fs::read_to_string(p.join("g.json")).unwrap()).unwrap();
    assert_eq!(header["n"], 40);
    let edges = std::fs::read_to_string(p.join("g.csv")).unwrap();
    assert_eq!(edges.lines().count(), 40 * 39 / 2);

    let bw = stdout_json(&big(p, &["bandwidth", "--points", "pts.csv", "--sigma", "0.5", "--m", "8"]));
    let omega = bw["omega"].as_f64().unwrap();
    assert!(omega.is_finite() && omega > 0.0);

    std::fs::write(p.join("lab.csv"), "index,value\n0,1\n1,0\n2,1\n").unwrap();
    for method in ["big-ls", "big-min", "harmonic"] {
        let out = big(p, &["interpolate", "--points", "pts.csv", "--labels", "lab.csv", "--sigma", "0.5", "--method", method]);
        assert!(out.status.success(), "{method}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("index,score,label"));
        assert_eq!(lines.count(), 40);
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"m": 2, "sigma": 0.1, "n": 1000}"#).unwrap();
    let v = stdout_json(&big(dir.path(), &["limits", "--config", "c.json", "--m", "3"]));
    assert_eq!(v["conditions"]["m"], 3);
    assert_eq!(v["conditions"]["n"], 1000);
    let sup = v["limit_bandwidth"].as_f64().unwrap();
    assert!((sup - 0.13279).abs() < 1e-4);
    assert!(v["finite_m_prediction"]["corrected"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn printed_variant_reports_domain_error_inline() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&big(dir.path(), &["limits", "--m", "20", "--sigma", "0.1"]));
    assert_eq!(v["finite_m_prediction"]["printed"]["error"]["kind"], "domain");
}

#[test]
fn failures_are_json_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(error_kind(&big(dir.path(), &["limits", "--sigma", "0.1"])), "invalid_input");
    assert_eq!(error_kind(&big(dir.path(), &["bandwidth", "--bogus"])), "usage");
    assert_eq!(error_kind(&big(dir.path(), &["bandwidth", "--points", "missing.csv", "--sigma", "1", "--m", "2"])), "io");
    assert_eq!(error_kind(&big(dir.path(), &["sample", "--n", "0"])), "invalid_input");
}

#[test]
fn experiments_write_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let v = stdout_json(&big(p, &["fig2", "--sample-sizes", "80,120", "--orders", "4,6", "--trials", "2", "--output-dir", "f2"]));
    assert_eq!(v["charts"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(p.join("f2/fig2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);

    std::fs::write(p.join("f3.json"), r#"{"offsets": [-1, 0, 1], "sample_sizes": [100], "trials": 2}"#).unwrap();
    let v = stdout_json(&big(p, &["fig3", "--config", "f3.json", "--orders", "5", "--serial", "--output-dir", "f3"]));
    assert_eq!(v["charts"].as_array().unwrap().len(), 1);
    let csv = std::fs::read_to_string(p.join("f3/fig3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
    assert!(std::fs::read_to_string(p.join("f3/fig3_n100_m5.svg")).unwrap().starts_with("<svg"));

    let v = stdout_json(&big(p, &["recovery-demo", "--output-dir", "rec"]));
    assert_eq!(v["condition_met"], true);
    assert!(p.join("rec/recovery.csv").exists() && p.join("rec/recovery.svg").exists());
}
