use std::path::{Path, PathBuf};

use netbell::cli::run;
use serde_json::Value;

fn data(file: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(file).display().to_string()
}

fn exec(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("netbell").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let (code, out, err) = exec(&full);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

#[test]
fn evaluate_ghz3() {
    let (code, out, _) = exec(&["evaluate", "--n", "3", "--state", "ghz"]);
    assert_eq!(code, 0);
    assert!(out.contains("4.828427"), "{out}");
    let v = json(&["evaluate", "--n", "3", "--state", "ghz"]);
    assert!((num(&v, "S") - 4.8284).abs() < 1e-4);
    assert_eq!(num(&v, "losr"), 4.0);
    assert!((num(&v, "violation") - 0.8284).abs() < 1e-4);
}

#[test]
fn evaluate_noisy_ghz4() {
    let v = json(&["evaluate", "--n", "4", "--state", "ghz", "--visibility", "0.9723"]);
    assert!((num(&v, "S") - 6.6393).abs() < 1e-4);
}

#[test]
fn evaluate_product_state() {
    let v = json(&["evaluate", "--n", "4", "--state", "gghz", "--xi", "1"]);
    assert_eq!(v["violates"], Value::Bool(false));
    assert!(num(&v, "violation") < 0.0);
}

#[test]
fn scan_crossings() {
    let xi = json(&["scan", "--n", "3", "--parameter", "xi", "--points", "101"]);
    assert!((num(&xi, "xi_crossing") - 0.9102).abs() < 0.01);
    let vis = json(&["scan", "--n", "3", "--parameter", "visibility", "--points", "101"]);
    assert!((num(&vis, "visibility_crossing") - 0.8284).abs() < 0.01);
    let thr = json(&["scan", "--parameter", "thresholds", "--max-n", "9"]);
    assert_eq!(thr["ordering_holds"], Value::Bool(true));
    assert_eq!(thr["thresholds"].as_array().unwrap().len(), 7);
}

#[test]
fn scan_csv_is_plot_ready() {
    let (code, out, _) = exec(&["--format", "csv", "scan", "--n", "4", "--parameter", "xi", "--points", "11"]);
    assert_eq!(code, 0);
    let header = out.lines().find(|l| l.starts_with("xi,")).expect("curve header");
    assert_eq!(header, "xi,S,S_noisy");
}

#[test]
fn certify_and_ablations() {
    let full = json(&["certify", "--n", "3"]);
    assert!((num(&full, "optimum") - 4.0).abs() < 1e-6);
    assert_eq!(full["proof_passed"], Value::Bool(true));
    let ns = json(&["certify", "--n", "3", "--no-signaling-only"]);
    assert!((num(&ns, "optimum") - 6.0).abs() < 1e-6);
    let ablated = json(&["certify", "--n", "3", "--drop-isomorphism", "--skip-proof"]);
    assert!(num(&ablated, "optimum") > 4.0 + 1e-3);
}

#[test]
fn certify_iteration_limit_is_a_compute_failure() {
    let (code, _, _) = exec(&["certify", "--n", "3", "--skip-proof", "--max-pivots", "5"]);
    assert_eq!(code, 1);
}

#[test]
fn certify_rejects_unsupported_n() {
    assert_eq!(exec(&["certify", "--n", "7"]).0, 2);
}

#[test]
fn simulate_experiment_plans() {
    let n4 = json(&["simulate", "--n", "4", "--visibility", "0.9723"]);
    let sigma4 = num(&n4, "sigma_violation");
    assert!((10.0..100.0).contains(&sigma4), "{sigma4}");
    let n3 = json(&["simulate", "--n", "3", "--visibility", "0.9603"]);
    assert!(num(&n3, "sigma_violation") > 15.0);
}

#[test]
fn simulate_is_reproducible() {
    let args = ["--seed", "17", "simulate", "--n", "4", "--visibility", "0.9723", "--replications", "3"];
    let a = exec(&args);
    let b = exec(&args);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    let c = exec(&["--seed", "18", "simulate", "--n", "4", "--visibility", "0.9723", "--replications", "3"]);
    assert_ne!(a.1, c.1);
    let threaded = exec(&["--seed", "17", "--threads", "3", "simulate", "--n", "4", "--visibility", "0.9723", "--replications", "3"]);
    assert_eq!(a.1, threaded.1);
}

#[test]
fn saved_config_replays_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg: PathBuf = dir.path().join("run.toml");
    let cfg_s = cfg.display().to_string();
    let first = exec(&["--seed", "99", "--save-config", &cfg_s, "simulate", "--n", "3", "--visibility", "0.95", "--replications", "2"]);
    assert_eq!(first.0, 0, "{}", first.2);
    let replay = exec(&["--config", &cfg_s]);
    assert_eq!(replay.0, 0, "{}", replay.2);
    assert_eq!(first.1, replay.1);
}

#[test]
fn fidelity_files() {
    let f4 = json(&["fidelity", "--file", &data("fidelity_ghz4.csv")]);
    assert!((num(&f4, "fidelity") - 0.9740).abs() < 5e-5);
    assert!((num(&f4, "visibility") - 0.9723).abs() < 5e-5);
    let f3 = json(&["fidelity", "--file", &data("fidelity_ghz3.csv"), "--n", "3"]);
    assert!((num(&f3, "fidelity") - 0.9653).abs() < 5e-5);
    assert!((num(&f3, "visibility") - 0.9603).abs() < 5e-5);
    for n in [3, 4] {
        let ideal = json(&["fidelity", "--file", &data(&format!("ideal_fidelity_ghz{n}.csv"))]);
        assert!((num(&ideal, "fidelity") - 1.0).abs() < 1e-12);
    }
}

#[test]
fn malformed_fidelity_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "# comment\nbasis_label,value,std_error\nPOP,0.99,0.01\nXXX,abc,0.01\n").unwrap();
    let (code, _, err) = exec(&["fidelity", "--file", &path.display().to_string()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 4"), "{err}");
    let (code, _, _) = exec(&["fidelity", "--file", "/nonexistent/file.csv"]);
    assert_eq!(code, 2);
}

#[test]
fn isomorphism_facts() {
    let v = json(&[
        "isomorphism",
        "--matrix",
        &data("theorem_inflation_n3.txt"),
        "--pair",
        "B,C'",
        "--compare",
        "A,B:A',B'",
        "--compare",
        "B,C:B',C'",
    ]);
    assert_eq!(v["pairs"][0]["gamma"], "(2,1,1)");
    assert_eq!(v["comparisons"][0]["isomorphic"], Value::Bool(true));
    assert_eq!(v["comparisons"][1]["isomorphic"], Value::Bool(false));
    assert_eq!(v["comparisons"][1]["oracle"], Value::Bool(false));
}

#[test]
fn isomorphism_rejects_invalid_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    std::fs::write(&path, "3 3\n0 1\n").unwrap();
    assert_eq!(exec(&["isomorphism", "--matrix", &path.display().to_string()]).0, 2);
}

#[test]
fn optimize_reaches_quantum_bound() {
    let v = json(&["optimize", "--n", "3", "--restarts", "4"]);
    assert!((num(&v, "value") - num(&v, "quantum_bound")).abs() < 1e-6);
}

#[test]
fn usage_errors() {
    assert_eq!(exec(&[]).0, 2);
    assert_eq!(exec(&["frobnicate"]).0, 2);
    assert_eq!(exec(&["evaluate", "--n", "two"]).0, 2);
    assert_eq!(exec(&["evaluate", "--n", "3", "--visibility", "1.5"]).0, 2);
    assert_eq!(exec(&["--format", "yaml", "evaluate"]).0, 2);
}
