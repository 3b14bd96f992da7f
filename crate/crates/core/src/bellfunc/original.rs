//! Three-setting inequality for parties Alice, Bob (three settings) and
//! Charlies `1..=N-2`, built from CHSH terms conditioned on the product of
//! the Charlies' setting-1 outcomes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::{correlation_table, CorrelationTable, MeasurementScenario, Observable, StateSpec};

/// Probability floor for the conditioning event `C̃_1 = +1`.
pub const CONDITIONING_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginalInequalityResult {
    pub lhs: f64,
    pub rhs: f64,
    pub violation: f64,
    pub conditional_bell: f64,
    pub i_same: f64,
    pub c_tilde: f64,
}

fn check_shape(n: usize, table: &CorrelationTable) -> Result<()> {
    if n < 3 {
        return Err(invalid(format!("the inequality needs at least 3 parties, got {n}")));
    }
    if table.n_parties() != n {
        return Err(Error::DimensionMismatch { expected: n, got: table.n_parties() });
    }
    let shape = table.settings_shape();
    if shape[1] < 3 || shape.iter().enumerate().any(|(p, &s)| p != 1 && s < 2) {
        return Err(invalid(format!("table settings {shape:?} lack Bob's third or another party's second setting")));
    }
    Ok(())
}

/// `<A_x B_y>` conditioned on `∏ C_1[i] = +1`, at setting tuple `(x, y, 1, ..., 1)`.
fn conditional_correlator(table: &CorrelationTable, x: usize, y: usize) -> Result<f64> {
    let n = table.n_parties();
    let mut tuple = vec![1; n];
    tuple[0] = x;
    tuple[1] = y;
    let dist = table.distribution(&tuple)?;
    let charlies = table.party_mask(2..n);
    let ab = table.party_mask(0..2);
    let mut p_cond = 0.0;
    let mut corr = 0.0;
    for (a, &p) in dist.iter().enumerate() {
        if (a & charlies).count_ones().is_multiple_of(2) {
            p_cond += p;
            corr += if (a & ab).count_ones().is_multiple_of(2) { p } else { -p };
        }
    }
    if p_cond <= CONDITIONING_FLOOR {
        return Err(Error::DegenerateConditioning(p_cond));
    }
    Ok(corr / p_cond)
}

fn pair(n: usize, (p, s): (usize, usize), (q, t): (usize, usize)) -> Vec<Option<usize>> {
    let mut v = vec![None; n];
    v[p] = Some(s);
    v[q] = Some(t);
    v
}

/// `I_Bell^{C̃=1} + 4 I_Same / (1 + <C̃>) <= 6 + (4(N-2) - 4<C̃>) / (1 + <C̃>)`.
pub fn evaluate_original(n: usize, table: &CorrelationTable) -> Result<OriginalInequalityResult> {
    check_shape(n, table)?;
    let e = |x, y| conditional_correlator(table, x, y);
    let conditional_bell = e(0, 0)? + e(0, 1)? + e(1, 0)? - e(1, 1)?;
    let mut tilde = vec![Some(1); n];
    tilde[0] = None;
    tilde[1] = None;
    let c_tilde = table.correlator(&tilde)?;
    let denom = 1.0 + c_tilde;
    if denom.abs() <= CONDITIONING_FLOOR {
        return Err(Error::SingularDenominator(c_tilde));
    }
    let mut i_same = table.correlator(&pair(n, (0, 0), (1, 2)))? + table.correlator(&pair(n, (1, 2), (2, 0)))?;
    for c in 2..n - 1 {
        i_same += table.correlator(&pair(n, (c, 0), (c + 1, 0)))?;
    }
    let nf = n as f64;
    let lhs = conditional_bell + 4.0 * i_same / denom;
    let rhs = 6.0 + (4.0 * (nf - 2.0) - 4.0 * c_tilde) / denom;
    Ok(OriginalInequalityResult { lhs, rhs, violation: lhs - rhs, conditional_bell, i_same, c_tilde })
}

/// Hand-derived GHZ settings: `A = (Z, X)`, `B = ((Z+X)/√2, (Z-X)/√2, Z)`,
/// Charlies `(Z, X)`. Used as a cross-check for the numerical search.
pub fn ideal_original_settings(n: usize) -> Result<MeasurementScenario> {
    if n < 3 {
        return Err(invalid(format!("the inequality needs at least 3 parties, got {n}")));
    }
    let q = std::f64::consts::FRAC_PI_4;
    let mut settings = vec![vec![Observable::Z, Observable::X]; n];
    settings[1] = vec![Observable::xz(q), Observable::xz(-q), Observable::Z];
    MeasurementScenario::new(settings)
}

#[derive(Clone, Debug)]
pub struct OriginalSearchOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
    pub min_step: f64,
}

impl Default for OriginalSearchOptions {
    fn default() -> Self {
        Self { restarts: 8, seed: 0, max_evals: 20_000, min_step: 1e-7 }
    }
}

fn scenario_from_angles(n: usize, angles: &[f64]) -> MeasurementScenario {
    let mut it = angles.chunks(2).map(|c| Observable::from_angles(c[0], c[1]));
    let settings = (0..n).map(|p| (0..if p == 1 { 3 } else { 2 }).map(|_| it.next().expect("angle count")).collect()).collect();
    MeasurementScenario { settings }
}

fn violation_at(state: &StateSpec, angles: &[f64]) -> f64 {
    let n = state.n_qubits();
    correlation_table(state, &scenario_from_angles(n, angles))
        .and_then(|t| evaluate_original(n, &t))
        .map_or(f64::NEG_INFINITY, |r| r.violation)
}

/// Random-restart coordinate pattern search over the Bloch angles of every
/// observable, maximizing the violation on `state`.
pub fn optimize_original_settings(
    state: &StateSpec,
    opts: &OriginalSearchOptions,
) -> Result<(MeasurementScenario, OriginalInequalityResult)> {
    let n = state.n_qubits();
    if n < 3 {
        return Err(invalid(format!("the inequality needs at least 3 parties, got {n}")));
    }
    let dims = 2 * (2 * n + 1);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(r as u64);
        let mut x: Vec<f64> = (0..dims).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
        let mut fx = violation_at(state, &x);
        let mut step = 0.5;
        let mut evals = 1;
        while step > opts.min_step && evals < opts.max_evals {
            let mut improved = false;
            for i in 0..dims {
                for dir in [1.0, -1.0] {
                    let old = x[i];
                    x[i] = old + dir * step;
                    let f = violation_at(state, &x);
                    evals += 1;
                    if f > fx {
                        fx = f;
                        improved = true;
                        break;
                    }
                    x[i] = old;
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        if best.as_ref().is_none_or(|(bf, _)| fx > *bf) {
            best = Some((fx, x));
        }
    }
    let (_, angles) = best.expect("at least one restart");
    let scenario = scenario_from_angles(n, &angles);
    let result = evaluate_original(n, &correlation_table(state, &scenario)?)?;
    Ok((scenario, result))
}
