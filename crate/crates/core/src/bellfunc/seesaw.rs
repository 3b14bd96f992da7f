//! Coordinate ascent over projective qubit measurements.
//!
//! With every other observable fixed, the functional is linear in the Bloch
//! vector of one party's setting, `S = c + v·g`, so the best unit vector is
//! `g / |g|`. Sweeping over all party-settings never decreases `S`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{evaluate_state, BellFunctional};
use crate::error::{invalid, Result};
use crate::quantum::{expectation, generalized_ghz, MeasurementScenario, Observable, StateSpec};

#[derive(Clone, Debug)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    /// Also optimize the generalized-GHZ parameter ξ after each sweep.
    pub optimize_xi: bool,
    pub threads: usize,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self { restarts: 32, max_iter: 500, tol: 1e-10, seed: 0, optimize_xi: false, threads: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeesawStatus {
    Converged,
    NotConverged,
}

#[derive(Clone, Debug)]
pub struct SeesawResult {
    pub value: f64,
    pub scenario: MeasurementScenario,
    pub xi: f64,
    pub status: SeesawStatus,
    pub iterations: usize,
    pub best_restart: usize,
    /// Final value of every restart, in restart order.
    pub restart_values: Vec<f64>,
}

/// Coefficient vector `g` of the functional in the Bloch vector of
/// `(party, setting)`.
fn gradient(
    functional: &BellFunctional,
    state: &StateSpec,
    scenario: &MeasurementScenario,
    party: usize,
    setting: usize,
) -> Result<[f64; 3]> {
    let mut g = [0.0; 3];
    for t in functional.terms.iter().filter(|t| t.settings[party] == Some(setting)) {
        let mut ops: Vec<Option<Observable>> = t
            .settings
            .iter()
            .enumerate()
            .map(|(p, s)| s.map(|s| scenario.observable(p, s)).transpose())
            .collect::<Result<_>>()?;
        for (k, pauli) in [Observable::X, Observable::Y, Observable::Z].into_iter().enumerate() {
            ops[party] = Some(pauli);
            g[k] += t.coeff * expectation(state, &ops)?;
        }
    }
    Ok(g)
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    (x, f(x))
}

struct RestartOutcome {
    value: f64,
    scenario: MeasurementScenario,
    xi: f64,
    converged: bool,
    iterations: usize,
}

fn run_restart(
    n: usize,
    functional: &BellFunctional,
    shape: &[usize],
    opts: &SeesawOptions,
    restart: usize,
) -> Result<RestartOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(restart as u64);
    let settings = shape.iter().map(|&k| (0..k).map(|_| Observable::random(&mut rng)).collect()).collect();
    let mut scenario = MeasurementScenario::new(settings)?;
    let mut xi = 0.0;
    let mut state = generalized_ghz(n, xi)?;
    let mut value = evaluate_state(functional, &state, &scenario)?;
    for iter in 1..=opts.max_iter {
        for p in 0..n {
            for s in 0..shape[p] {
                let g = gradient(functional, &state, &scenario, p, s)?;
                let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                if norm > 1e-14 {
                    scenario.settings[p][s] = Observable::from_direction(g)?;
                }
            }
        }
        if opts.optimize_xi {
            let f = |x: f64| {
                generalized_ghz(n, x)
                    .and_then(|st| evaluate_state(functional, &st, &scenario))
                    .unwrap_or(f64::NEG_INFINITY)
            };
            let (best_xi, best) = golden_section(f, -1.0, 1.0, 1e-10);
            if best > evaluate_state(functional, &state, &scenario)? {
                xi = best_xi;
                state = generalized_ghz(n, xi)?;
            }
        }
        let next = evaluate_state(functional, &state, &scenario)?;
        let delta = (next - value).abs();
        value = next;
        if delta < opts.tol {
            return Ok(RestartOutcome { value, scenario, xi, converged: true, iterations: iter });
        }
    }
    Ok(RestartOutcome { value, scenario, xi, converged: false, iterations: opts.max_iter })
}

/// Best value of `functional` over projective qubit measurements on the GHZ
/// state (or generalized GHZ states when `opts.optimize_xi` is set).
///
/// Restart `r` draws its initial Bloch vectors from stream `r` of a ChaCha8
/// generator seeded with `opts.seed`; results are identical for any thread
/// count. Ties are broken towards the lowest restart index.
pub fn seesaw_quantum_max(n: usize, functional: &BellFunctional, opts: &SeesawOptions) -> Result<SeesawResult> {
    if functional.n_parties != n {
        return Err(invalid(format!("functional has {} parties, expected {n}", functional.n_parties)));
    }
    if opts.restarts == 0 {
        return Err(invalid("see-saw needs at least one restart"));
    }
    let shape = functional.settings_shape();
    let threads = opts.threads.clamp(1, opts.restarts);
    let mut outcomes: Vec<Option<Result<RestartOutcome>>> = (0..opts.restarts).map(|_| None).collect();
    if threads == 1 {
        for (r, slot) in outcomes.iter_mut().enumerate() {
            *slot = Some(run_restart(n, functional, &shape, opts, r));
        }
    } else {
        let per = opts.restarts.div_ceil(threads);
        std::thread::scope(|scope| {
            for (w, block) in outcomes.chunks_mut(per).enumerate() {
                let shape = &shape;
                scope.spawn(move || {
                    for (i, slot) in block.iter_mut().enumerate() {
                        *slot = Some(run_restart(n, functional, shape, opts, w * per + i));
                    }
                });
            }
        });
    }
    let outcomes: Vec<RestartOutcome> = outcomes.into_iter().map(|o| o.expect("every restart ran")).collect::<Result<_>>()?;
    let restart_values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let mut best = 0;
    for (r, o) in outcomes.iter().enumerate() {
        if o.value > outcomes[best].value {
            best = r;
        }
    }
    let o = &outcomes[best];
    Ok(SeesawResult {
        value: o.value,
        scenario: o.scenario.clone(),
        xi: o.xi,
        status: if o.converged { SeesawStatus::Converged } else { SeesawStatus::NotConverged },
        iterations: o.iterations,
        best_restart: best,
        restart_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellfunc::{bounds, s_functional};

    #[test]
    fn reaches_quantum_bound_n3() {
        let s = s_functional(3).unwrap();
        let r = seesaw_quantum_max(3, &s, &SeesawOptions::default()).unwrap();
        let q = bounds(3).unwrap().quantum;
        assert!((r.value - q).abs() < 1e-6, "value {}", r.value);
        assert!(r.restart_values.iter().all(|&v| v <= q + 1e-6));
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let s = s_functional(3).unwrap();
        let base = SeesawOptions { restarts: 6, seed: 5, ..Default::default() };
        let a = seesaw_quantum_max(3, &s, &base).unwrap();
        let b = seesaw_quantum_max(3, &s, &SeesawOptions { threads: 4, ..base }).unwrap();
        assert_eq!(a.restart_values, b.restart_values);
        assert_eq!(a.best_restart, b.best_restart);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let s = s_functional(4).unwrap();
        let opts = SeesawOptions { restarts: 1, max_iter: 1, tol: 0.0, ..Default::default() };
        let r = seesaw_quantum_max(4, &s, &opts).unwrap();
        assert_eq!(r.status, SeesawStatus::NotConverged);
    }

    #[test]
    fn xi_optimization_stays_below_bound() {
        let s = s_functional(3).unwrap();
        let opts = SeesawOptions { restarts: 4, optimize_xi: true, ..Default::default() };
        let r = seesaw_quantum_max(3, &s, &opts).unwrap();
        assert!(r.value <= bounds(3).unwrap().quantum + 1e-6);
        assert!(r.value > 4.0);
    }
}
