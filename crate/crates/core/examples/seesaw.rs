//! See-saw search for the quantum maximum of S_N over qubit GHZ-family
//! states and projective measurements.

use netbell::bellfunc::{bounds, s_functional, seesaw_quantum_max, SeesawOptions};

fn main() -> netbell::Result<()> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    for n in [3, 4] {
        let opts = SeesawOptions { restarts: 32, seed: 2024, threads, optimize_xi: true, ..SeesawOptions::default() };
        let res = seesaw_quantum_max(n, &s_functional(n)?, &opts)?;
        let q = bounds(n)?.quantum;
        println!(
            "N = {n}: best {:.12} (bound {:.12}, gap {:.2e}), xi = {:.6}, {:?} after {} sweeps",
            res.value,
            q,
            q - res.value,
            res.xi,
            res.status,
            res.iterations
        );
        let worst = res.restart_values.iter().copied().fold(f64::INFINITY, f64::min);
        println!("       restarts span [{worst:.6}, {:.6}]", res.value);
        for (p, obs) in res.scenario.settings.iter().enumerate() {
            let dirs: Vec<String> =
                obs.iter().map(|o| o.bloch()).map(|[x, y, z]| format!("({x:+.4}, {y:+.4}, {z:+.4})")).collect();
            println!("       party {p}: {}", dirs.join("  "));
        }
    }
    Ok(())
}
