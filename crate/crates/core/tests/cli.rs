use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const INSTANCE: &str = r#"{"K":2,"S":2,"p_max":[1,1],"N0":0.5,"B":[1,1],"gains":[[2,0.5],[2.5,1]]}"#;

fn pmac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmac")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn solve_pa_reports_converged_profile() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", INSTANCE);
    let v = json(&pmac(&["solve-pa", &inst]));
    assert_eq!(v["converged"], true);
    let p = &v["profile"];
    assert!((p[0][0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((p[1][1].as_f64().unwrap() - 0.75).abs() < 1e-9);
}

#[test]
fn enumerate_cs_lists_both_equilibria_and_exports_graph() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", INSTANCE);
    let edges = dir.path().join("edges.txt");
    let v = json(&pmac(&["enumerate-cs", &inst, "--edges", edges.to_str().unwrap()]));
    assert_eq!(v["count"], 2);
    assert_eq!(v["exhaustive"], true);
    let labels: Vec<&str> = v["equilibria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["label"].as_str().unwrap())
        .collect();
    assert!(labels.contains(&"potential-max") && labels.contains(&"local"));
    let lines = fs::read_to_string(&edges).unwrap();
    assert_eq!(lines.lines().count(), 4);
}

#[test]
fn cap_exceeded_has_its_own_exit_code() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", INSTANCE);
    let out = pmac(&["--cap", "3", "enumerate-cs", &inst]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn malformed_instance_is_rejected() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "bad.json", r#"{"K":2,"S":2,"p_max":[1],"N0":1,"B":[1,1],"gains":[[1,1],[1,1]]}"#);
    let out = pmac(&["solve-pa", &inst]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn classify_from_gains() {
    let v = json(&pmac(&["classify-2x2", "--gains", "2,0.5,2.5,1", "--snr-db", "0"]));
    assert_eq!(v["pa"]["region"], "B5");
    assert_eq!(v["cs"]["regions"][0], "A1");
    assert!((v["pa"]["equilibrium"]["profile"][1][1].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert_eq!(pmac(&["classify-2x2", "--gains", "1,2"]).status.code(), Some(1));
}

#[test]
fn sic_rates_sum_to_total() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", INSTANCE);
    let v = json(&pmac(&["sic", &inst, "--game", "a", "--order", "2,1"]));
    let rates: f64 = v["rates"].as_array().unwrap().iter().map(|r| r.as_f64().unwrap()).sum();
    assert!((rates - v["sum_rate"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn experiment_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "spec.json",
        r#"{"kind":"nse_vs_snr","K":4,"loads":[1.0,2.0],"snr_grid_db":[0,20],"trials":20,"seed":5}"#,
    );
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = pmac(&["--format", "csv", "--out", out.to_str().unwrap(), "experiment", &spec]);
        assert!(status.status.success());
        fs::read_to_string(Path::new(&out)).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    assert!(a.starts_with("load,K,S,snr_db"));
    assert_eq!(a.lines().count(), 5);
}
