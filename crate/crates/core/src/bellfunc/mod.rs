//! Bell functionals over full correlators: the `S_N` family, its bounds and
//! thresholds, classical brute force, and the three-setting inequality with
//! conditioned CHSH terms.

mod original;
mod seesaw;

pub use original::{
    evaluate_original, ideal_original_settings, optimize_original_settings, OriginalInequalityResult,
    OriginalSearchOptions,
};
pub use seesaw::{seesaw_quantum_max, SeesawOptions, SeesawResult, SeesawStatus};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::{
    canonical_three_qubit, check_canonical, expectation, standard_settings, CorrelationTable, MeasurementScenario,
    StateSpec,
};

/// One correlator `coeff * <∏ X_{p, settings[p]}>` over present parties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub settings: Vec<Option<usize>>,
}

impl Term {
    pub fn present(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.settings.iter().enumerate().filter_map(|(p, s)| s.map(|s| (p, s)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellFunctional {
    #[serde(rename = "n")]
    pub n_parties: usize,
    pub terms: Vec<Term>,
    pub name: String,
}

impl BellFunctional {
    pub fn new(n_parties: usize, terms: Vec<Term>, name: impl Into<String>) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            if t.settings.len() != n_parties {
                return Err(Error::DimensionMismatch { expected: n_parties, got: t.settings.len() });
            }
            if t.present().count() < 1 {
                return Err(invalid(format!("term {i} has no present party")));
            }
            if !t.coeff.is_finite() || t.coeff == 0.0 {
                return Err(invalid(format!("term {i} has coefficient {}", t.coeff)));
            }
        }
        Ok(Self { n_parties, terms, name: name.into() })
    }

    /// Number of settings each party needs (largest referenced index + 1).
    pub fn settings_shape(&self) -> Vec<usize> {
        let mut shape = vec![1; self.n_parties];
        for t in &self.terms {
            for (p, s) in t.present() {
                shape[p] = shape[p].max(s + 1);
            }
        }
        shape
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text)?;
        Self::new(f.n_parties, f.terms, f.name)
    }
}

fn term(n: usize, coeff: f64, present: &[(usize, usize)]) -> Term {
    let mut settings = vec![None; n];
    for &(p, s) in present {
        settings[p] = Some(s);
    }
    Term { coeff, settings }
}

/// `A0B0 + A0B1 + A1B0C1..W1 - A1B1C1..W1 + 2(A0C0 + C0D0 + ... + V0W0)`.
pub fn s_functional(n: usize) -> Result<BellFunctional> {
    if n < 3 {
        return Err(invalid(format!("S_N is defined for N >= 3, got {n}")));
    }
    let ones: Vec<(usize, usize)> = (2..n).map(|p| (p, 1)).collect();
    let mut terms = vec![term(n, 1.0, &[(0, 0), (1, 0)]), term(n, 1.0, &[(0, 0), (1, 1)])];
    let mut t = vec![(0, 1), (1, 0)];
    t.extend_from_slice(&ones);
    terms.push(term(n, 1.0, &t));
    let mut t = vec![(0, 1), (1, 1)];
    t.extend_from_slice(&ones);
    terms.push(term(n, -1.0, &t));
    // chain A0C0, C0D0, ..., V0W0
    let chain: Vec<usize> = std::iter::once(0).chain(2..n).collect();
    for w in chain.windows(2) {
        terms.push(term(n, 2.0, &[(w[0], 0), (w[1], 0)]));
    }
    BellFunctional::new(n, terms, format!("S_{n}"))
}

/// `A0B0 + A0B1 + A1B0 - A1B1`.
pub fn chsh() -> BellFunctional {
    let terms = vec![
        term(2, 1.0, &[(0, 0), (1, 0)]),
        term(2, 1.0, &[(0, 0), (1, 1)]),
        term(2, 1.0, &[(0, 1), (1, 0)]),
        term(2, -1.0, &[(0, 1), (1, 1)]),
    ];
    BellFunctional { n_parties: 2, terms, name: "CHSH".into() }
}

/// `Σ coeff * correlator` with absent parties marginalized.
pub fn evaluate(functional: &BellFunctional, table: &CorrelationTable) -> Result<f64> {
    if table.n_parties() != functional.n_parties {
        return Err(Error::DimensionMismatch { expected: functional.n_parties, got: table.n_parties() });
    }
    functional.terms.iter().map(|t| Ok(t.coeff * table.correlator(&t.settings)?)).sum()
}

/// Evaluates directly from the state, one expectation per term.
pub fn evaluate_state(functional: &BellFunctional, state: &StateSpec, scenario: &MeasurementScenario) -> Result<f64> {
    if scenario.n_parties() != functional.n_parties {
        return Err(Error::DimensionMismatch { expected: functional.n_parties, got: scenario.n_parties() });
    }
    functional
        .terms
        .iter()
        .map(|t| {
            let ops = t
                .settings
                .iter()
                .enumerate()
                .map(|(p, s)| s.map(|s| scenario.observable(p, s)).transpose())
                .collect::<Result<Vec<_>>>()?;
            Ok(t.coeff * expectation(state, &ops)?)
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub losr: f64,
    pub quantum: f64,
    pub algebraic: Option<f64>,
}

pub fn bounds(n: usize) -> Result<BoundSet> {
    if n < 3 {
        return Err(invalid(format!("bounds defined for N >= 3, got {n}")));
    }
    let nf = n as f64;
    Ok(BoundSet {
        losr: 2.0 * (nf - 1.0),
        quantum: 2.0 * std::f64::consts::SQRT_2 + 2.0 * (nf - 2.0),
        algebraic: (n == 3).then_some(6.0),
    })
}

/// `η_N = (N-1)/(N-2+√2)`, the visibility at which the GHZ value meets the
/// LOSR bound.
pub fn noise_threshold(n: usize) -> Result<f64> {
    bounds(n)?;
    let nf = n as f64;
    Ok((nf - 1.0) / (nf - 2.0 + std::f64::consts::SQRT_2))
}

/// `η'_N = (2N-1)/(2N-2+√2)` for the three-setting inequality.
pub fn original_noise_threshold(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(invalid(format!("threshold defined for N >= 3, got {n}")));
    }
    let nf = n as f64;
    Ok((2.0 * nf - 1.0) / (2.0 * nf - 2.0 + std::f64::consts::SQRT_2))
}

/// `√(2√2 - 2)`: root of `√2(1 + √(1-ξ²)) = 2`.
pub fn xi_critical() -> f64 {
    (2.0 * std::f64::consts::SQRT_2 - 2.0).sqrt()
}

/// Closed form of `S_N` on the generalized GHZ state with standard settings.
pub fn s_generalized_ghz_closed_form(n: usize, xi: f64, visibility: f64) -> f64 {
    visibility * (std::f64::consts::SQRT_2 * (1.0 + (1.0 - xi * xi).sqrt()) + 2.0 * (n as f64 - 2.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CanonicalCondition {
    /// Left-hand side of the violation condition.
    pub value: f64,
    pub violates: bool,
    /// `S_3` of the canonical state under the standard settings.
    pub engine_value: f64,
    /// Whether `value` and `engine_value` agree within 1e-9.
    pub agrees: bool,
}

/// `√2((h0+h4)² + 2h3² + h0² + h4² - 1) + 4(h0² + h4² + h2²) - 2`, compared with
/// the LOSR bound 4 and with the engine value.
pub fn canonical_condition(h: [f64; 5], phi: f64) -> Result<CanonicalCondition> {
    check_canonical(h)?;
    let [h0, _h1, h2, h3, h4] = h;
    let value = std::f64::consts::SQRT_2 * ((h0 + h4).powi(2) + 2.0 * h3 * h3 + h0 * h0 + h4 * h4 - 1.0)
        + 4.0 * (h0 * h0 + h4 * h4 + h2 * h2)
        - 2.0;
    let state = canonical_three_qubit(h, phi)?;
    let engine_value = evaluate_state(&s_functional(3)?, &state, &standard_settings(3)?)?;
    Ok(CanonicalCondition { value, violates: value > 4.0, engine_value, agrees: (value - engine_value).abs() < 1e-9 })
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(invalid(format!("permutation has length {}, expected {n}", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(invalid(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Relabels parties: party `i` of the result plays the role of party
/// `perm[i]` of `functional`.
pub fn permuted_variant(functional: &BellFunctional, perm: &[usize]) -> Result<BellFunctional> {
    check_permutation(perm, functional.n_parties)?;
    let terms = functional
        .terms
        .iter()
        .map(|t| Term { coeff: t.coeff, settings: perm.iter().map(|&p| t.settings[p]).collect() })
        .collect();
    let name = format!("{}{perm:?}", functional.name);
    BellFunctional::new(functional.n_parties, terms, name)
}

/// Largest number of `(party, setting)` pairs enumerated by brute force.
pub const BRUTE_FORCE_MAX_BITS: usize = 24;

/// Maximum over all deterministic strategies (a `±1` value per party and
/// setting).
pub fn brute_force_deterministic_max(functional: &BellFunctional) -> Result<f64> {
    let shape = functional.settings_shape();
    let offsets: Vec<usize> = shape
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let bits: usize = shape.iter().sum();
    if bits > BRUTE_FORCE_MAX_BITS {
        return Err(invalid(format!("{bits} party-settings exceed the brute-force cap {BRUTE_FORCE_MAX_BITS}")));
    }
    let masks: Vec<(f64, u32)> = functional
        .terms
        .iter()
        .map(|t| (t.coeff, t.present().fold(0u32, |m, (p, s)| m | 1 << (offsets[p] + s))))
        .collect();
    let mut best = f64::NEG_INFINITY;
    for strategy in 0u32..(1u32 << bits) {
        // bit set means outcome -1
        let v: f64 = masks
            .iter()
            .map(|&(c, m)| if (strategy & m).count_ones() % 2 == 0 { c } else { -c })
            .sum();
        best = best.max(v);
    }
    Ok(best)
}
