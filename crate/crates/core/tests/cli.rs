mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use betalike::cumulants::{moments_to_cumulants, MomentSet};
use common::{fixture, parse_table};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betalike")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exponential_density_mean() {
    let data = fixture("reliability.csv");
    let v = json(&run(&["density", "--model", "exponential", "--tau", "1", "--data", path(&data)]));
    assert!((v["mean"].as_f64().unwrap() - 0.669921875).abs() < 1e-9);
    assert_eq!(v["model"], "exponential");
    assert!(v["support_notes"].as_array().is_some_and(|n| !n.is_empty()));
}

#[test]
fn logistic_uniform_table() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("two.csv");
    fs::write(&data, "outcome,predictor\nsuccess,0\nfailure,0\n").unwrap();
    let prefix = dir.path().join("uniform");
    json(&run(&["density", "--model", "logistic", "--z", "0", "--data", path(&data), "--out", path(&prefix)]));
    let table = fs::read_to_string(dir.path().join("uniform.tsv")).unwrap();
    assert!(table.starts_with("# normalizer="));
    assert_eq!(table.lines().nth(1), Some("theta\tdensity"));
    let (_, ys) = parse_table(&table);
    let worst = ys.iter().map(|y| (y - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3, "worst deviation {worst}");
    assert!(dir.path().join("uniform.json").exists());
}

#[test]
fn missing_flag_is_named() {
    let out = run(&["density", "--model", "exponential", "--data", path(&fixture("reliability.csv"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--tau"), "{}", stderr(&out));
    let out = run(&["density", "--model", "logistic", "--data", path(&fixture("binary_dose.csv"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--z"));
}

#[test]
fn poisson_no_event_moment() {
    // Five unit windows with seven events; guess 2 adds to the observed time.
    let v = json(&run(&[
        "moments", "--model", "poisson", "--data", path(&fixture("counts.csv")), "--tau", "1", "--m", "0", "--prior-guess", "2",
    ]));
    let (n, total) = (7, 5.0f64 + 2.0);
    let want = (total / (1.0 + total)).powi(n + 1);
    assert!((v["moments"]["m1"].as_f64().unwrap() - want).abs() < 1e-14);
}

#[test]
fn cumulants_echo_moments() {
    let v = json(&run(&[
        "moments", "--model", "cumulative-poisson", "--data", path(&fixture("counts.csv")), "--tau", "0.5", "--m", "1",
    ]));
    let m = &v["moments"];
    let get = |k: &str| m[k].as_f64().unwrap();
    let c = moments_to_cumulants(&MomentSet::new(get("m1"), get("m2"), get("m3"), get("m4"))).unwrap();
    for (k, want) in [("mu", c.mu), ("sigma", c.sigma), ("gamma", c.gamma), ("kappa", c.kappa)] {
        assert_eq!(v["cumulants"][k].as_f64().unwrap(), want, "{k}");
    }
}

#[test]
fn wrong_model_for_command() {
    let out = run(&["moments", "--model", "logistic", "--data", path(&fixture("binary_dose.csv")), "--tau", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["density", "--model", "bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn select_reports() {
    let data = fixture("reliability_mixed.csv");
    let v = json(&run(&["select", "--data", path(&data), "--k-range", "0.999", "1.001"]));
    let p: Vec<f64> = v["models"].as_array().unwrap().iter().map(|m| m["posterior"].as_f64().unwrap()).collect();
    assert!((p[0] - 0.5).abs() < 2e-3 && (p[1] - 0.5).abs() < 2e-3, "{p:?}");
    assert_eq!(v["cancelled"], "C_lambda,(r-1)!,prod dx_i");
    assert_eq!(v["k_range"].as_array().unwrap().len(), 2);

    let v = json(&run(&["select", "--data", path(&data), "--prior-m1", "1.0"]));
    assert_eq!(v["models"][0]["name"], "exponential");
    assert_eq!(v["models"][0]["posterior"].as_f64(), Some(1.0));

    let out = run(&["select", "--data", path(&data), "--k-range", "0", "inf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("improper"), "{}", stderr(&out));
}

#[test]
fn numerical_failure_exits_two() {
    // This posterior reaches shapes near 0.05, whose waiting-time sums have
    // kurtosis no bounded MaxEnt support can hold, with real cell weight.
    let out = run(&["poisson-like", "--data", path(&fixture("reliability_mixed.csv")), "--tau", "1", "--m", "1", "--grid-n", "8"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("moment problem infeasible"));
}

#[test]
fn impossible_cumulants_are_a_user_error() {
    let out = run(&["maxent", "--cumulants", "0.5,0.1,1,1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["maxent", "--cumulants", "0.5,0.1,1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn poisson_like_single_probability() {
    let v = json(&run(&["poisson-like", "--shape", "1", "--rate", "1", "--tau", "1", "--m", "0"]));
    assert_eq!(v["probability"].as_f64(), Some((-1.0f64).exp()));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    let data = fixture("reliability.csv");
    fs::write(&config, format!(r#"{{"model": "exponential", "tau": 4.0, "data": {:?}}}"#, path(&data))).unwrap();
    // The command-line --tau overrides the file.
    let v = json(&run(&["density", "--config", path(&config), "--tau", "1"]));
    assert!((v["mean"].as_f64().unwrap() - 0.669921875).abs() < 1e-9);
    fs::write(&config, r#"{"modle": "exponential"}"#).unwrap();
    assert_eq!(run(&["density", "--config", path(&config)]).status.code(), Some(1));
}

#[test]
fn help_version_and_thread_env() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_betalike"))
        .args(["maxent", "--cumulants", "0.3,0.1,0.5,3.5"])
        .env("BETALIKE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_data_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "kind,time\nfailure,1.0\nfailure,-1.0\n").unwrap();
    let out = run(&["density", "--model", "exponential", "--tau", "1", "--data", path(&data)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn positive_maxent_table() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("sum");
    let v = json(&run(&["maxent", "--positive", "--cumulants", "4,2,1,4.5", "--out", path(&prefix)]));
    let table = fs::read_to_string(dir.path().join("sum.tsv")).unwrap();
    assert_eq!(table.lines().nth(1), Some("q\tdensity"));
    let support = v["support"].as_array().unwrap();
    assert_eq!(support[0].as_f64(), Some(0.0));
    assert_eq!(support[1].as_f64(), Some(16.0));
}
