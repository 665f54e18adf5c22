use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pslet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pslet"))
        .args(args)
        .env_remove("PSLET_CONFIG_DIR")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn error_class(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    v["error"]["class"].as_str().unwrap().to_string()
}

fn pade(record: &Value, label: &str) -> f64 {
    record["pade"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["label"] == label)
        .and_then(|p| p["value"].as_f64())
        .unwrap()
}

#[test]
fn solve_npo() {
    let out = pslet(&["solve", "--potential", "npo", "--a0", "1", "--a", "10", "--b", "1000", "--l", "0", "--k", "0", "--scale", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let e = r["final_value"].as_f64().unwrap();
    assert!((e - 3.0099799).abs() < 1e-7, "{e}");
    assert!((pade(&r, "E[3,3]") - 3.0099799).abs() < 1e-7);
    assert_eq!(r["partial_sums"].as_array().unwrap().len(), 10);
    assert_eq!(r["corrections"].as_array().unwrap().len(), 9);
    for key in ["q0", "w", "beta", "lbar", "e_minus2"] {
        assert!(r[key].is_f64(), "{key}");
    }
    assert_eq!(r["flags"]["critical"], false);
}

#[test]
fn solve_harmonic_is_exact() {
    let r = json(&pslet(&["solve", "--potential", "harmonic", "--A", "1", "--l", "0", "--k", "0"]));
    assert_eq!(r["final_value"].as_f64(), Some(1.5));
    assert_eq!(r["flags"]["stable"], true);
}

#[test]
fn solve_cutoff_coulomb_magnitude() {
    let out = pslet(&[
        "solve", "--potential", "cutoff_coulomb", "--c", "0.3", "--l", "0", "--k", "0", "--scale", "0.5", "--report", "magnitude",
    ]);
    let r = json(&out);
    assert!((pade(&r, "E[4,4]") - 0.2935835059).abs() < 1e-8);
    assert!(r["final_value"].as_f64().unwrap() > 0.0);
    assert!(r["partial_sums"].as_array().unwrap().iter().all(|v| v.as_f64().unwrap() > 0.0));
}

#[test]
fn output_is_deterministic_with_twelve_digits() {
    let args = ["solve", "--potential", "npo", "--a", "100", "--b", "10", "--l", "1", "--scale", "1"];
    let a = pslet(&args);
    let b = pslet(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    for token in text.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == '-')) {
        let mantissa = token.split('e').next().unwrap();
        let digits = mantissa.trim_start_matches('-').replace('.', "");
        let significant = digits.trim_start_matches('0');
        assert!(significant.len() <= 12, "{token}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "# NPO run\npotential = npo\na = 10\nb = 1000\nl = 3   # overridden below\nscale = 1\n").unwrap();
    let r = json(&pslet(&["solve", "--config", path.to_str().unwrap(), "--l", "0"]));
    assert_eq!(r["inputs"]["angular"].as_f64(), Some(0.0));
    assert!((r["final_value"].as_f64().unwrap() - 3.0099799).abs() < 1e-7);
}

#[test]
fn errors_carry_class_and_exit_code() {
    let out = pslet(&["solve", "--potential", "npo", "--a", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_class(&out), "config");

    let out = pslet(&["solve", "--potential", "npo", "--a", "1", "--b", "1", "--pade", "4,5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = pslet(&["solve", "--potential", "harmonic", "--A", "1", "--config", "/nonexistent/run.conf"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_class(&out), "io");

    let out = pslet(&["table", "t9"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_class(&out), "config");
    assert_eq!(pslet(&["table", "t10"]).status.code(), Some(2));
    assert_eq!(pslet(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn table_t3() {
    let out = pslet(&["table", "t3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|row| row["status"] == "pass"));
    assert_eq!(r["summary"]["passed"], 20);
    // rows come back in file order despite running concurrently
    let labels: Vec<&str> = rows.iter().map(|r| r["label"].as_str().unwrap()).collect();
    assert_eq!(labels[0], "l=0 b=1");
    assert_eq!(labels[19], "l=4 b=1000");
}

#[test]
fn table_failure_sets_exit_status() {
    // one row of t5 sits 2.8e-5 from its reference against a 2e-5 class
    let out = pslet(&["table", "t5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("row,label,E_P,\"E[3,3]\",\"E[3,4]\",\"E[4,4]\",final"));
    assert_eq!(text.lines().filter(|l| l.ends_with(",fail")).count(), 1);
}

#[test]
fn config_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("t1.conf"),
        "title = exact oscillator\npotential = harmonic\nA = 2\ntolerance = rel:1e-12\nrow = l=0 reference=3\nrow = l=1 reference=5\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pslet"))
        .args(["table", "t1", "--format", "human"])
        .env("PSLET_CONFIG_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("exact oscillator"));
    assert!(text.contains("2 rows: 2 passed"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t7.json");
    let out = pslet(&["table", "t7", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 16);
}

#[test]
fn diagnose_stabilization() {
    let r = json(&pslet(&["diagnose", "--potential", "npo", "--a", "0.1", "--b", "0.1", "--l", "5", "--scale", "1"]));
    assert_eq!(r["stabilization_index"], 3);
    assert_eq!(r["partial_sums"].as_array().unwrap().len(), 10);
    let r = json(&pslet(&["diagnose", "--potential", "harmonic", "--A", "1"]));
    assert_eq!(r["stabilization_index"], 1);
}

#[test]
fn diagnose_critical_with_oracle() {
    let r = json(&pslet(&[
        "diagnose", "--potential", "npo", "--a", "100", "--b", "10", "--l", "0", "--scale", "1", "--oracle",
    ]));
    assert_eq!(r["critical"], true);
    assert!(r["partial_sum_spread"].as_f64().unwrap() > 0.1);
    let o = &r["oracle"];
    assert!((o["oracle"].as_f64().unwrap() - 11.572197).abs() < 1e-4);
    assert_eq!(o["spread_dominates"], true);
}

#[test]
fn formats() {
    let out = pslet(&["solve", "--potential", "coulomb", "--l", "1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("quantity,value\n"));
    assert!(text.contains("final,-0.125"));
    let out = pslet(&["diagnose", "--potential", "coulomb", "--format", "human"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("stabilize at E_1"));
}

#[test]
fn wavefunction_dump() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.csv");
    let out = pslet(&[
        "solve", "--potential", "harmonic", "--A", "1", "--l", "2", "--psi-out", path.to_str().unwrap(), "--psi-points", "11",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(Path::new(&path)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "q,psi,psi2");
    assert_eq!(lines.len(), 12);
}
