//! End-to-end tests of the command-line interface: exit codes, report
//! schema, and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_bratteli-spectra");

const DYADIC: &str = r#"{
  "vertices": ["v"],
  "edges": [["0", "v", "v"], ["1", "v", "v"]],
  "star_edge": "0",
  "tau": {"0": "0", "1": "0"},
  "horizontal": [["0", "1", "+"], ["1", "0", "-"]],
  "rho": 0.5
}"#;

const EV1: &str = r#"{
  "vertices": ["x", "y"],
  "edges": [["p","x","x"],["q","x","x"],["r","x","y"],["s","y","y"],["t","y","y"],["u","y","x"]],
  "star_edge": "p",
  "tau": {"p":"p","q":"p","r":"u","s":"u","t":"u","u":"p"},
  "horizontal": [
    ["p","q","+"],["q","p","-"],["p","r","+"],["r","p","-"],["q","r","+"],["r","q","-"],
    ["s","t","+"],["t","s","-"],["s","u","+"],["u","s","-"],["t","u","+"],["u","t","-"]
  ],
  "rho": 0.5
}"#;

const FIB_RULES: &str = r#"{"alphabet":["a","b"],"rules":[["a",["a","b"]],["b",["a"]]]}"#;
const TM_RULES: &str = r#"{"alphabet":["a","b"],"rules":[["a",["a","b"]],["b",["b","a"]]]}"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_with_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(BIN)
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

#[test]
fn analyze_dyadic_reports_dimension_and_warning() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dyadic.json", DYADIC);
    let out = run(&["analyze", "--spec", &spec]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["results"]["spectral_dimension"], 1.0);
    let pole = &report["results"]["poles"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["location"]["im"] == 0.0)
        .unwrap()["residue"]["re"];
    assert!((pole.as_f64().unwrap() - 1.0 / std::f64::consts::LN_2).abs() < 1e-9);
    let warnings = report["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("residue")));
}

#[test]
fn analyze_flags_unit_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "ev1.json", EV1);
    let out = run(&["analyze", "--spec", &spec]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let warnings = report["warnings"].as_array().unwrap();
    assert!(warnings
        .iter()
        .any(|w| w.as_str().unwrap().contains("logarithmic term")));
}

#[test]
fn invalid_rho_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "bad.json", &DYADIC.replace("0.5", "1.0"));
    let out = run(&["analyze", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn heat_usage_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dyadic.json", DYADIC);
    let out = run(&["heat", "--spec", &spec, "--t-min", "-1.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thue_morse_pisot_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let rules = write(dir.path(), "tm.json", TM_RULES);
    let out = run(&["pisot", "--rules", &rules]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn disconnected_horizontal_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "disconnected.json",
        &DYADIC.replace(
            r#"[["0", "1", "+"], ["1", "0", "-"]]"#,
            "[]",
        ),
    );
    let pairs = write(dir.path(), "pairs.json", r#"[{"x": ["1"], "y": ["0"]}]"#);
    let out = run(&["distance", "--spec", &spec, "--pairs", &pairs]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn distance_oracle_cross_check() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dyadic.json", DYADIC);
    let pairs = write(
        dir.path(),
        "pairs.json",
        r#"[{"x": ["1"], "y": ["0"]}, {"x": ["0","1","1"], "y": ["0"]}, {"x": ["1"], "y": ["1"]}]"#,
    );
    let out = run(&["distance", "--spec", &spec, "--pairs", &pairs, "--oracle"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,y,distance,tail_bound,n_xy,c_xy,oracle"
    );
    assert!(lines.next().unwrap().starts_with("1,0,0.5,0,1,1,0.5"));
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dyadic.json", DYADIC);
    let a = run(&["analyze", "--spec", &spec]);
    let b = run(&["analyze", "--spec", &spec]);
    assert_eq!(a.stdout, b.stdout);

    let heat_args = ["heat", "--spec", &spec, "--points", "12"];
    let one = run_with_env(&heat_args, "BRATTELI_SPECTRA_THREADS", "1");
    let four = run_with_env(&heat_args, "BRATTELI_SPECTRA_THREADS", "4");
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn form_converges_on_circle_mode() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dyadic.json", DYADIC);
    let out = run(&["form", "--spec", &spec, "--trig", "1"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let limit = report["results"]["limit"]["re"].as_f64().unwrap();
    let expected = (2.0 * std::f64::consts::PI).powi(2);
    assert!((limit - expected).abs() < 1e-5 * expected);
    assert_eq!(report["results"]["converged"], true);
}

#[test]
fn telescope_and_omega_reports() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dyadic.json", DYADIC);
    let out = run(&["telescope", "--spec", &spec, "-p", "2", "--samples", "40", "--seed", "1"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["results"]["lipschitz"]["all_pass"], true);
    assert!(report["results"]["dimension_deviation"].as_f64().unwrap() < 1e-12);

    let rules = write(dir.path(), "fib.json", FIB_RULES);
    let out = run(&["omega", "--rules", &rules]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["results"]["s0"], 2.0);
    assert_eq!(report["results"]["residues_positive"], true);
    assert!(report["results"]["slope_fit_deviation"].as_f64().unwrap() < 0.02);
}

#[test]
fn pisot_eigenvalue_table_csv() {
    let dir = tempfile::tempdir().unwrap();
    let rules = write(dir.path(), "fib.json", FIB_RULES);
    let out = run(&[
        "pisot", "--rules", &rules, "--format", "csv", "--beta", "1,0", "--beta", "0,1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "beta,delta_tr,delta_lg");
    assert_eq!(lines.count(), 2);
}

#[test]
fn zeta_and_measure_commands() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dyadic.json", DYADIC);
    let out = run(&["zeta", "--spec", &spec, "--re", "2.0"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((report["results"]["closed_form"]["re"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let out = run(&["measure", "--spec", &spec, "--depth", "2"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let table = report["results"]["table"].as_array().unwrap();
    assert_eq!(table.len(), 2 + 4);
}
