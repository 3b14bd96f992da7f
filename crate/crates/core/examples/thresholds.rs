//! Noise and state-parameter thresholds, with ξ_c recovered by bisection on
//! engine-evaluated S_N rather than from its closed form.

use netbell::bellfunc::{bounds, evaluate_state, noise_threshold, original_noise_threshold, s_functional, xi_critical};
use netbell::quantum::{generalized_ghz, standard_settings};

fn engine_s(n: usize, xi: f64) -> netbell::Result<f64> {
    evaluate_state(&s_functional(n)?, &generalized_ghz(n, xi)?, &standard_settings(n)?)
}

fn main() -> netbell::Result<()> {
    println!("N   eta_N      eta'_N (original inequality)");
    for n in 3..=10 {
        println!("{n:<3} {:.7}  {:.7}", noise_threshold(n)?, original_noise_threshold(n)?);
    }
    for n in [3, 4] {
        let losr = bounds(n)?.losr;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if engine_s(n, mid)? > losr {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        println!("N = {n}: S_N crosses the LOSR bound at xi = {:.10} (closed form {:.10})", lo, xi_critical());
    }
    Ok(())
}
