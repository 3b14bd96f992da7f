use std::path::Path;

use netbell::cli::run;
use serde_json::Value;

fn schema(kind: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{kind}.schema.json"));
    let text = std::fs::read_to_string(&path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn output(args: &[&str]) -> Value {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = ["netbell", "--format", "json"].into_iter().chain(args.iter().copied());
    assert_eq!(run(argv, &mut out, &mut err), 0, "{}", String::from_utf8_lossy(&err));
    serde_json::from_slice(&out).unwrap()
}

fn check(args: &[&str]) {
    let v = output(args);
    let kind = v["schema"].as_str().unwrap().split('/').nth(1).unwrap().to_string();
    assert_eq!(kind, args[0]);
    let errors: Vec<String> = schema(&kind).iter_errors(&v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{args:?}: {errors:?}");
}

#[test]
fn every_command_validates() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let file = |f: &str| data.join(f).display().to_string();
    let (fid, mat) = (file("fidelity_ghz4.csv"), file("theorem_inflation_n4.txt"));
    let runs: Vec<Vec<&str>> = vec![
        vec!["evaluate", "--n", "3"],
        vec!["evaluate", "--n", "4", "--state", "gghz", "--xi", "0.5", "--std-error", "0.0375"],
        vec!["scan", "--n", "4", "--parameter", "xi", "--points", "11", "--visibility", "0.9723"],
        vec!["scan", "--n", "3", "--parameter", "visibility", "--points", "11"],
        vec!["scan", "--parameter", "thresholds"],
        vec!["certify", "--n", "3"],
        vec!["certify", "--n", "3", "--no-signaling-only"],
        vec!["certify", "--n", "3", "--drop-isomorphism", "--skip-proof"],
        vec!["simulate", "--n", "3", "--replications", "3"],
        vec!["fidelity", "--file", &fid],
        vec!["isomorphism", "--n", "3", "--pair", "B,C'", "--compare", "A,B:A',B'"],
        vec!["isomorphism", "--matrix", &mat],
        vec!["optimize", "--n", "4", "--restarts", "2"],
    ];
    for args in &runs {
        check(args);
    }
}

#[test]
fn schemas_reject_wrong_kind() {
    let v = output(&["evaluate", "--n", "3"]);
    assert!(!schema("fidelity").is_valid(&v));
    let mut broken = v.clone();
    broken.as_object_mut().unwrap().remove("S");
    assert!(!schema("evaluate").is_valid(&broken));
}
