//! Regenerates the engine-derived files under `data/`. The two
//! `fidelity_ghz*.csv` inputs are hand-written and left alone.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use netbell::bellfunc::ideal_original_settings;
use netbell::expsim::{engine_expectations, write_expectations_csv};
use netbell::netcore::build_theorem_inflation;
use netbell::quantum::{correlation_table, ghz, standard_settings};

fn main() -> netbell::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for n in [3, 4] {
        std::fs::write(data.join(format!("theorem_inflation_n{n}.txt")), build_theorem_inflation(n)?.to_text())?;

        let settings: Vec<Vec<[f64; 3]>> =
            standard_settings(n)?.settings.iter().map(|p| p.iter().map(|o| o.bloch()).collect()).collect();
        let mut f = File::create(data.join(format!("standard_settings_n{n}.json")))?;
        writeln!(f, "{}", serde_json::json!({ "settings": settings }))?;

        write_expectations_csv(&engine_expectations(n, 1.0)?, File::create(data.join(format!("ideal_fidelity_ghz{n}.csv")))?)?;
    }
    for (n, vis) in [(4, "0.9723"), (3, "0.9603")] {
        let state = ghz(n)?.with_visibility(vis.parse().expect("literal"))?;
        let table = correlation_table(&state, &ideal_original_settings(n)?)?;
        let mut f = File::create(data.join(format!("original_ghz{n}_v{vis}.csv")))?;
        writeln!(f, "# Engine table, not measured data: white-noise GHZ_{n} at visibility {vis}")?;
        writeln!(f, "# with the hand-derived settings (A: Z, X; B: (Z+X)/sqrt2, (Z-X)/sqrt2, Z; others: Z, X).")?;
        table.write_csv(f)?;
    }
    println!("fixtures written to {}", data.display());
    Ok(())
}
