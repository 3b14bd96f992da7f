//! S_N on the GHZ state with the standard settings, against its three bounds.

use netbell::bellfunc::{bounds, evaluate_state, s_functional, s_generalized_ghz_closed_form};
use netbell::quantum::{ghz, standard_settings};

fn main() -> netbell::Result<()> {
    println!("{:>2}  {:>10}  {:>6}  {:>10}  {:>9}  {:>10}", "N", "S_N", "LOSR", "quantum", "algebraic", "violation");
    for n in 3..=8 {
        let s = evaluate_state(&s_functional(n)?, &ghz(n)?, &standard_settings(n)?)?;
        let b = bounds(n)?;
        assert!((s - s_generalized_ghz_closed_form(n, 0.0, 1.0)).abs() < 1e-10);
        let alg = b.algebraic.map_or("-".to_string(), |a| format!("{a}"));
        println!("{n:>2}  {s:>10.6}  {:>6}  {:>10.6}  {alg:>9}  {:>10.6}", b.losr, b.quantum, s - b.losr);
    }
    Ok(())
}
