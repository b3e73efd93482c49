use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orlicz-gauge")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = bin(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

#[test]
fn rearrange_indicator_moves_to_origin() {
    let v = json(&["rearrange", "--f", "indicator:a=2,b=3", "--window", "1,10", "--cells", "8"]);
    assert!((v["integral"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["edges"][0].as_f64(), Some(0.0));
    let edges = v["edges"].as_array().unwrap();
    assert!((edges.last().unwrap().as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn gauge_norm_of_indicator() {
    // ‖χ(1,4)‖ in L² is √3
    let v = json(&["gauge-norm", "--f", "indicator:a=1,b=4", "--gauge", "gauge(phi=power:p=2, u=one)"]);
    assert!((v["value"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-9);
    let d = json(&["gauge-norm", "--f", "indicator:a=0.5,b=1.5", "--gauge", "gauge(phi=power:p=2, u=one)", "--dual"]);
    assert!((d["value"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn apply_hardy_average_of_indicator() {
    let v = json(&["apply", "--kernel", "hardy-averaging", "--f", "indicator:a=0,b=1", "--window", "0.01,100", "--cells", "40"]);
    let edges = v["edges"].as_array().unwrap();
    let values = v["values"].as_array().unwrap();
    // the window keeps mass 0.99 of f; Hardy rows are taken at the x midpoint
    let (a, b) = (edges[edges.len() - 2].as_f64().unwrap(), edges[edges.len() - 1].as_f64().unwrap());
    let exact = 0.99 / (0.5 * (a + b));
    assert!((values.last().unwrap().as_f64().unwrap() - exact).abs() < 1e-9 * exact);
}

#[test]
fn iterate_rearrange_reports_matrix() {
    let v = json(&["iterate-rearrange", "--kernel", "hardy-indicator", "--window", "0.1,10", "--cells", "4"]);
    let rows = v["values"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].as_array().unwrap().len(), 4);
    assert_eq!(v["unchanged"], Value::Bool(false));
}

#[test]
fn check_hlp_hilbert_is_pi() {
    let v = json(&["check", "hlp", "--kernel", "hilbert", "--p", "2"]);
    assert_eq!(v["condition"], "hlp");
    assert_eq!(v["verdict"], "holds");
    assert!((v["details"]["integral"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-2);
}

#[test]
fn check_fields_and_inconclusive_exit_zero() {
    let v = json(&["check", "radial", "--kernel", "power-radial", "--lambda", "0.75", "--p", "2", "--q", "3"]);
    for field in ["condition", "windows", "parts", "c_star", "verdict", "warnings"] {
        assert!(v.get(field).is_some(), "missing {field}");
    }
    assert_eq!(v["parts"][0]["suprema"].as_array().unwrap().len(), 3);
}

#[test]
fn check_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = bin(&["check", "power-case", "--kernel", "sum:k=exp:c=1", "--p", "2", "--q", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["condition"], "power-case");
    assert_eq!(v["verdict"], "holds");
}

#[test]
fn refusals_and_bad_input_exit_nonzero() {
    let out = bin(&["check", "radial", "--kernel", "hilbert", "--p", "2", "--q", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("radial"));
    let out = bin(&["check", "power-case", "--kernel", "sum:k=exp:c=1", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`q`"));
    assert!(!bin(&["rearrange", "--f", "nonsense:x=1"]).status.success());
    assert!(!bin(&["rearrange", "--f", "const:c=1", "--window", "5,1"]).status.success());
}

#[test]
fn oneil_rows_bound_the_left_side() {
    let v = json(&["oneil", "--kernel", "power-radial:lambda=0.75", "--f", "indicator:a=0,b=1", "--points", "5", "--cells", "256"]);
    for row in v.as_array().unwrap() {
        let lhs = row["lhs"].as_f64().unwrap();
        assert!(lhs <= row["oneil_bound"].as_f64().unwrap());
        assert!(lhs <= row["rearranged_bound"].as_f64().unwrap() * (1.0 + 1e-9));
    }
    let out = bin(&["oneil", "--kernel", "hilbert", "--f", "indicator:a=0,b=1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_reports_and_succeeds_on_any_verdict() {
    for name in ["power_exp.json", "radial_2_3.json"] {
        let dir = tempfile::tempdir().unwrap();
        let out = bin(&["run", configs().join(name).to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert!(report["c_hat"].as_f64().unwrap() > 0.0);
        let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert!(csv.starts_with("member,ratio,numerator,denominator"));
    }
}

#[test]
fn run_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"inequality": "power", "kernel": "hilbert", "p": 2, "q": 3, "grid_n": 0}"#).unwrap();
    let out = bin(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid_n"));
}
