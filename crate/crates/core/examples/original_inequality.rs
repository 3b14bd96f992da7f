//! The conditional-CHSH style inequality on ingested correlation tables and
//! on settings found by numerical search.

use std::fs::File;
use std::path::Path;

use netbell::bellfunc::{evaluate_original, optimize_original_settings, OriginalSearchOptions};
use netbell::quantum::{ghz, CorrelationTable};

fn main() -> netbell::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for (n, file, reported, err) in
        [(4, "original_ghz4_v0.9723.csv", 0.5361, 0.1258), (3, "original_ghz3_v0.9603.csv", 0.5685, 0.0905)]
    {
        let table = CorrelationTable::read_csv(File::open(data.join(file))?)?;
        let r = evaluate_original(n, &table)?;
        println!(
            "N = {n}: violation {:.4} (lhs {:.4}, rhs {:.4}, <C~> {:+.1e}); reported {reported} +- {err}, {}",
            r.violation,
            r.lhs,
            r.rhs,
            r.c_tilde,
            if (r.violation - reported).abs() <= err { "within" } else { "outside" }
        );
    }
    for n in [3, 4] {
        let opts = OriginalSearchOptions { restarts: 4, seed: 5, ..Default::default() };
        let (_, r) = optimize_original_settings(&ghz(n)?, &opts)?;
        println!("N = {n}: searched settings on the ideal GHZ state give violation {:.6}", r.violation);
    }
    Ok(())
}
