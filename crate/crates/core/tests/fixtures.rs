//! The engine-derived files under `data/` match what the library produces
//! today. Regenerate them with `cargo run --example generate_fixtures`.

use std::fs::File;
use std::path::{Path, PathBuf};

use netbell::bellfunc::{evaluate, ideal_original_settings, s_functional};
use netbell::cli::read_settings_file;
use netbell::expsim::{engine_expectations, read_expectations_csv};
use netbell::netcore::{build_theorem_inflation, validate_inflation, InflationSpec};
use netbell::quantum::{correlation_table, ghz, standard_settings, CorrelationTable};

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(file)
}

#[test]
fn inflation_files() {
    for n in [3, 4] {
        let text = std::fs::read_to_string(data(&format!("theorem_inflation_n{n}.txt"))).unwrap();
        let built = build_theorem_inflation(n).unwrap();
        assert_eq!(text, built.to_text());
        let parsed = InflationSpec::from_text(&text).unwrap();
        assert!(validate_inflation(&parsed).is_valid());
    }
}

#[test]
fn settings_files() {
    for n in [3, 4] {
        let read = read_settings_file(&data(&format!("standard_settings_n{n}.json"))).unwrap();
        let ours = standard_settings(n).unwrap();
        assert_eq!(read.shape(), ours.shape());
        let s = evaluate(&s_functional(n).unwrap(), &correlation_table(&ghz(n).unwrap(), &read).unwrap()).unwrap();
        assert!((s - (2.0 * std::f64::consts::SQRT_2 + 2.0 * (n as f64 - 2.0))).abs() < 1e-12);
    }
}

#[test]
fn ideal_expectation_files() {
    for n in [3, 4] {
        let read = read_expectations_csv(File::open(data(&format!("ideal_fidelity_ghz{n}.csv"))).unwrap()).unwrap();
        assert_eq!(read, engine_expectations(n, 1.0).unwrap());
    }
}

#[test]
fn original_tables() {
    for (n, vis) in [(4, "0.9723"), (3, "0.9603")] {
        let read = CorrelationTable::read_csv(File::open(data(&format!("original_ghz{n}_v{vis}.csv"))).unwrap()).unwrap();
        let state = ghz(n).unwrap().with_visibility(vis.parse().unwrap()).unwrap();
        let ours = correlation_table(&state, &ideal_original_settings(n).unwrap()).unwrap();
        assert_eq!(read.settings_shape(), ours.settings_shape());
        for k in 0..ours.n_setting_tuples() {
            for (a, b) in read.distribution_at(k).iter().zip(ours.distribution_at(k)) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }
}
