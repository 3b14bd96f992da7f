//! Inflation LP certification of the LOSR bound and its ablations.

use std::time::Instant;

use netbell::bellfunc::s_functional;
use netbell::certifier::{certify_losr_bound, certify_losr_bound_with, max_over_nosignaling, Ablation, SolveOptions};

fn main() -> netbell::Result<()> {
    for n in [3, 4] {
        let t = Instant::now();
        let c = certify_losr_bound(n)?;
        println!(
            "N = {n}: {:?} optimum {:.9} via {:?} ({} iterations, {:.2?}); reduced LP {} x {}, max violation {:.1e}",
            c.status,
            c.optimum,
            c.method,
            c.iterations,
            t.elapsed(),
            c.reduced_vars,
            c.reduced_rows,
            c.max_violation
        );
    }
    let ns = max_over_nosignaling(&s_functional(3)?)?;
    println!("no-signaling only, N = 3: {:.9}", ns.optimum);
    let drop = certify_losr_bound_with(3, Ablation { drop_isomorphism: true }, &SolveOptions::default())?;
    println!("without isomorphism equalities, N = 3: {:.9}", drop.optimum);
    for note in &drop.notes {
        println!("  note: {note}");
    }
    Ok(())
}
