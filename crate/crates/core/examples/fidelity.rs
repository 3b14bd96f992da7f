//! GHZ fidelity and white-noise visibility from per-basis expectation values.

use std::fs::File;
use std::path::Path;

use netbell::expsim::{engine_expectations, fidelity_from_visibility, fidelity_ghz3, fidelity_ghz4, read_expectations_csv, visibility_from_fidelity};

fn main() -> netbell::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let f4 = fidelity_ghz4(&read_expectations_csv(File::open(data.join("fidelity_ghz4.csv"))?)?)?;
    let f3 = fidelity_ghz3(&read_expectations_csv(File::open(data.join("fidelity_ghz3.csv"))?)?)?;
    for f in [f4, f3] {
        println!(
            "N = {}: F = {:.4} +- {:.4}, visibility {:.4} +- {:.4}",
            f.n, f.fidelity, f.std_error, f.visibility, f.visibility_std_error
        );
    }
    for v in [1.0, 0.9723, 0.5] {
        let f = fidelity_ghz4(&engine_expectations(4, v)?)?;
        let back = visibility_from_fidelity(4, fidelity_from_visibility(4, v))?;
        println!("engine at visibility {v}: F = {:.10}, round trip {:.2e}", f.fidelity, (back - v).abs());
    }
    Ok(())
}
