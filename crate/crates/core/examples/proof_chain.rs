//! Step-by-step check of the analytic derivation of the LOSR bound.

use netbell::certifier::verify_proof_chain;

fn main() -> netbell::Result<()> {
    for n in [3, 4, 5] {
        let report = verify_proof_chain(n)?;
        println!("N = {n}: {}", if report.passed() { "all steps pass" } else { "FAILED" });
        for step in &report.steps {
            println!("  [{}] {:<32} {}", if step.passed { "ok" } else { "!!" }, step.name, step.detail);
        }
    }
    Ok(())
}
