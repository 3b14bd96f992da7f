//! Fixes the original parties of the inflation LP to a noisy GHZ table and
//! reports the largest uniform positivity margin. The margin changes sign at
//! the noise threshold.

use netbell::bellfunc::noise_threshold;
use netbell::certifier::{certify_table_compatibility, SolveOptions};
use netbell::quantum::{correlation_table, ghz, standard_settings};

fn main() -> netbell::Result<()> {
    let n = 3;
    let eta = noise_threshold(n)?;
    for v in [0.70, eta - 0.01, eta, eta + 0.01, 0.95] {
        let table = correlation_table(&ghz(n)?.with_visibility(v)?, &standard_settings(n)?)?;
        let c = certify_table_compatibility(n, &table, &SolveOptions::default())?;
        println!("visibility {v:.6}: {:?}, margin {:+.3e}", c.status, c.positivity_margin.unwrap_or(f64::NAN));
    }
    Ok(())
}
