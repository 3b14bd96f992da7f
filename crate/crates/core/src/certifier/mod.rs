//! Linear-programming certification of Bell bounds.
//!
//! Problems are stated in probability form ([`LpProblem`]) but solved in
//! correlator coordinates: a no-signaling box over `m` binary-outcome parties
//! is exactly a vector of correlators `E(S, x_S)`, one per nonempty party
//! subset and setting choice, subject to positivity of
//! `q(a|x) = 2^-m Σ_S ∏_{i∈S} a_i E(S, x_S)`. Equalities merge correlators,
//! fixed values become constants, and correlators that are odd under an
//! outcome-relabelling symmetry of the whole problem are set to zero (an
//! optimal symmetric solution always exists). The resulting LP is solved
//! through its dual with [`simplex`] or, for large problems, [`ipm`]; the
//! primal correlators are read off the multipliers, and the full `q` is
//! rebuilt and checked against every materialized row.

mod problem;
mod proof;
pub mod ipm;
pub mod simplex;

pub use problem::{build_theorem_lp, isomorphism_equalities, CorrelatorEquality, LpProblem, Pattern, RowFamily, SparseRow};
pub use proof::{verify_proof_chain, ProofReport, ProofStep};

use std::collections::HashMap;

use serde::Serialize;

use crate::bellfunc::{bounds, BellFunctional};
use crate::error::{invalid, Error, Result};
use crate::quantum::CorrelationTable;
use ipm::IpmOptions;
use simplex::{DenseLp, SimplexOptions, SimplexStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Optimal => "optimal",
            Self::Infeasible => "infeasible",
            Self::Unbounded => "unbounded",
            Self::IterationLimit => "iteration_limit",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub problem: String,
    pub status: LpStatus,
    pub optimum: f64,
    /// Probability variables of the probability-form LP.
    pub n_vars: usize,
    /// Materialized rows of the probability-form LP.
    pub n_rows: usize,
    pub reduced_vars: usize,
    pub reduced_rows: usize,
    /// Algorithm that produced the solution.
    pub method: LpMethod,
    /// Simplex pivots or interior-point iterations, summed over solves.
    pub iterations: usize,
    /// Largest violation of any row by the rebuilt primal solution.
    pub max_violation: f64,
    /// Objective recomputed from the rebuilt primal solution.
    pub recomputed_optimum: f64,
    /// Positivity rows of the reduced LP that are tight at the solution.
    pub active_rows: usize,
    /// Largest uniform lower bound on every `q(a|x)`, computed when the
    /// problem fixes correlators; negative means infeasible.
    pub positivity_margin: Option<f64>,
    pub seed_fixture: Option<String>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub primal: Vec<f64>,
}

impl Certificate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// LP algorithm. `Auto` uses the simplex method up to
/// [`SIMPLEX_MAX_ENTRIES`] matrix entries and the interior-point method above.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpMethod {
    #[default]
    Auto,
    Simplex,
    InteriorPoint,
}

pub const SIMPLEX_MAX_ENTRIES: usize = 1_000_000;

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub method: LpMethod,
    pub simplex: SimplexOptions,
    pub ipm: IpmOptions,
    /// Skip rebuilding and checking the full probability vector.
    pub skip_verification: bool,
    pub seed_fixture: Option<String>,
}

const MAX_LP_PARTIES: usize = 8;
const SLOT_BITS: usize = 2;

fn pattern_code(p: &[Option<usize>]) -> usize {
    p.iter().enumerate().map(|(i, s)| s.map_or(0, |s| (s + 1) << (SLOT_BITS * i))).sum()
}

/// GF(2) span used for the outcome-flip symmetry.
#[derive(Default)]
struct XorBasis {
    rows: Vec<u32>,
}

impl XorBasis {
    fn reduce(&self, mut v: u32) -> u32 {
        for &r in &self.rows {
            v = v.min(v ^ r);
        }
        v
    }

    fn insert(&mut self, v: u32) {
        let v = self.reduce(v);
        if v != 0 {
            self.rows.push(v);
            self.rows.sort_unstable_by(|a, b| b.cmp(a));
        }
    }

    fn contains(&self, v: u32) -> bool {
        self.reduce(v) == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Slot {
    Zero,
    Fixed(f64),
    Free(usize),
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

struct Reduced {
    slots: Vec<Slot>,
    n_free: usize,
    rows: Vec<(Vec<(u32, i32)>, f64)>,
    objective: Vec<f64>,
    objective_offset: f64,
    infeasible: Option<String>,
}

fn validate(problem: &LpProblem) -> Result<()> {
    let m = problem.n_parties();
    if m == 0 || m > MAX_LP_PARTIES {
        return Err(invalid(format!("LP supports 1..={MAX_LP_PARTIES} parties, got {m}")));
    }
    if problem.settings.len() != m || problem.party_types.len() != m {
        return Err(invalid("settings and party types must list every party"));
    }
    if problem.settings.iter().any(|&s| !(1..=3).contains(&s)) {
        return Err(invalid("each party needs 1 to 3 settings"));
    }
    let check = |p: &Pattern| -> Result<()> {
        if p.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: p.len() });
        }
        if p.iter().all(Option::is_none) {
            return Err(invalid("a correlator needs at least one party"));
        }
        if p.iter().zip(&problem.settings).any(|(s, &k)| s.is_some_and(|s| s >= k)) {
            return Err(invalid(format!("pattern {p:?} uses a setting outside {:?}", problem.settings)));
        }
        Ok(())
    };
    problem.objective.iter().try_for_each(|(_, p)| check(p))?;
    problem.equalities.iter().try_for_each(|e| check(&e.lhs).and(check(&e.rhs)))?;
    problem.fixed.iter().try_for_each(|(p, _)| check(p))
}

fn reduce(problem: &LpProblem) -> Reduced {
    let m = problem.n_parties();
    let n_codes = 1usize << (SLOT_BITS * m);
    let parity = |p: &Pattern| -> u32 {
        p.iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| 1u32 << (3 * problem.party_types[i] + s)))
            .fold(0, |a, b| a ^ b)
    };
    let parity_code = |code: usize| -> u32 {
        (0..m)
            .filter_map(|i| {
                let slot = (code >> (SLOT_BITS * i)) & 3;
                (slot > 0).then(|| 1u32 << (3 * problem.party_types[i] + slot - 1))
            })
            .fold(0, |a, b| a ^ b)
    };
    let valid_code = |code: usize| -> bool {
        code != 0 && (0..m).all(|i| ((code >> (SLOT_BITS * i)) & 3) <= problem.settings[i])
    };

    // correlators allowed to be nonzero by the flip symmetry
    let mut span = XorBasis::default();
    for (_, p) in &problem.objective {
        span.insert(parity(p));
    }
    for (p, v) in &problem.fixed {
        if *v != 0.0 {
            span.insert(parity(p));
        }
    }
    for e in &problem.equalities {
        span.insert(parity(&e.lhs) ^ parity(&e.rhs));
    }

    let mut uf = UnionFind((0..n_codes).collect());
    for e in &problem.equalities {
        uf.union(pattern_code(&e.lhs), pattern_code(&e.rhs));
    }
    let mut infeasible = None;
    let mut root_value: HashMap<usize, f64> = HashMap::new();
    for (p, v) in &problem.fixed {
        let code = pattern_code(p);
        let root = uf.find(code);
        if !span.contains(parity_code(code)) && v.abs() > 1e-12 {
            infeasible = Some(format!("fixed correlator {} = {v} breaks symmetry", problem.pattern_label(p)));
        }
        if let Some(old) = root_value.insert(root, *v) {
            if (old - v).abs() > 1e-12 {
                infeasible = Some(format!("{} is tied to conflicting values {old} and {v}", problem.pattern_label(p)));
            }
        }
    }
    let mut slots = vec![Slot::Zero; n_codes];
    let mut root_col: HashMap<usize, usize> = HashMap::new();
    let mut n_free = 0;
    for code in 0..n_codes {
        if !valid_code(code) || !span.contains(parity_code(code)) {
            continue;
        }
        let root = uf.find(code);
        slots[code] = if let Some(&v) = root_value.get(&root) {
            Slot::Fixed(v)
        } else {
            let col = *root_col.entry(root).or_insert_with(|| {
                n_free += 1;
                n_free - 1
            });
            Slot::Free(col)
        };
    }

    let mut objective = vec![0.0; n_free];
    let mut objective_offset = 0.0;
    for (c, p) in &problem.objective {
        match slots[pattern_code(p)] {
            Slot::Free(j) => objective[j] += c,
            Slot::Fixed(v) => objective_offset += c * v,
            Slot::Zero => {}
        }
    }

    // positivity rows, deduplicated; identical coefficients keep the
    // smallest constant
    let mut index: HashMap<Vec<(u32, i32)>, usize> = HashMap::new();
    let mut rows: Vec<(Vec<(u32, i32)>, f64)> = Vec::new();
    let mut scratch = vec![0i32; n_free];
    let mut touched: Vec<usize> = Vec::new();
    for t in 0..problem.n_setting_tuples() {
        let x = CorrelationTable::decode_settings(&problem.settings, t);
        let subsets: Vec<(usize, Slot)> = (1..1usize << m)
            .filter_map(|s| {
                let code: usize = (0..m).filter(|i| s >> i & 1 == 1).map(|i| (x[i] + 1) << (SLOT_BITS * i)).sum();
                let slot = slots[code];
                (slot != Slot::Zero).then_some((s, slot))
            })
            .collect();
        for a in 0..1usize << m {
            let mut constant = 1.0;
            for &(s, slot) in &subsets {
                let sign = if (s & a).count_ones() % 2 == 0 { 1 } else { -1 };
                match slot {
                    Slot::Free(j) => {
                        if scratch[j] == 0 {
                            touched.push(j);
                        }
                        scratch[j] += sign;
                    }
                    Slot::Fixed(v) => constant += sign as f64 * v,
                    Slot::Zero => {}
                }
            }
            touched.sort_unstable();
            let key: Vec<(u32, i32)> =
                touched.iter().filter(|&&j| scratch[j] != 0).map(|&j| (j as u32, scratch[j])).collect();
            for &j in &touched {
                scratch[j] = 0;
            }
            touched.clear();
            if key.is_empty() {
                if constant < -1e-9 {
                    infeasible = Some(format!("fixed correlators make q(a|x) negative at x = {x:?}"));
                }
                continue;
            }
            match index.get(&key) {
                Some(&r) => rows[r].1 = rows[r].1.min(constant),
                None => {
                    index.insert(key.clone(), rows.len());
                    rows.push((key, constant));
                }
            }
        }
    }
    Reduced { slots, n_free, rows, objective, objective_offset, infeasible }
}

/// Rebuilds `q(a|x)` from correlator values by a Walsh-Hadamard transform.
fn expand(problem: &LpProblem, slots: &[Slot], e: &[f64]) -> Vec<f64> {
    let m = problem.n_parties();
    let dim = 1usize << m;
    let mut q = vec![0.0; problem.n_vars()];
    let mut f = vec![0.0; dim];
    for t in 0..problem.n_setting_tuples() {
        let x = CorrelationTable::decode_settings(&problem.settings, t);
        // f is indexed by subsets in table bit order (party 0 = MSB)
        for (s, fs) in f.iter_mut().enumerate() {
            if s == 0 {
                *fs = 1.0;
                continue;
            }
            let code: usize =
                (0..m).filter(|i| s >> (m - 1 - i) & 1 == 1).map(|i| (x[i] + 1) << (SLOT_BITS * i)).sum();
            *fs = match slots[code] {
                Slot::Zero => 0.0,
                Slot::Fixed(v) => v,
                Slot::Free(j) => e[j],
            };
        }
        let mut h = 1;
        while h < dim {
            for i in (0..dim).step_by(2 * h) {
                for j in i..i + h {
                    let (u, v) = (f[j], f[j + h]);
                    f[j] = u + v;
                    f[j + h] = u - v;
                }
            }
            h *= 2;
        }
        for (a, v) in f.iter().enumerate() {
            q[(t << m) | a] = v / dim as f64;
        }
    }
    q
}

fn map_status(s: SimplexStatus) -> LpStatus {
    match s {
        SimplexStatus::Optimal => LpStatus::Optimal,
        // the primal box is bounded, so a failed dual means no primal point
        SimplexStatus::Infeasible | SimplexStatus::Unbounded => LpStatus::Infeasible,
        SimplexStatus::IterationLimit => LpStatus::IterationLimit,
    }
}

/// Dual of `max obj·e` over the positivity rows:
/// `max Σ -k_r y_r` subject to `Σ_r G_rj y_r = -obj_j`, `y >= 0`. The row
/// multipliers of an optimal basis are the primal correlators.
fn objective_dual(red: &Reduced) -> DenseLp {
    let (rows, cols) = (red.n_free, red.rows.len());
    let mut a = vec![0.0; rows * cols];
    for (r, (coeffs, _)) in red.rows.iter().enumerate() {
        for &(j, g) in coeffs {
            a[j as usize * cols + r] = g as f64;
        }
    }
    DenseLp {
        rows,
        cols,
        a,
        b: red.objective.iter().map(|c| -c).collect(),
        c: red.rows.iter().map(|(_, k)| -k).collect(),
    }
}

/// Dual of the margin problem `max t` subject to `k_r + G_r·e >= t`:
/// `max Σ -k_r y_r` subject to `Σ_r G_rj y_r = 0`, `Σ_r y_r = 1`, `y >= 0`.
/// The last multiplier is `-t`.
fn margin_dual(red: &Reduced) -> DenseLp {
    let mut lp = objective_dual(red);
    lp.b.iter_mut().for_each(|b| *b = 0.0);
    lp.a.extend(std::iter::repeat_n(1.0, lp.cols));
    lp.b.push(1.0);
    lp.rows += 1;
    lp
}

fn solve_dense(lp: &DenseLp, opts: &SolveOptions, cert: &mut Certificate) -> simplex::SimplexResult {
    let method = match opts.method {
        LpMethod::Auto if lp.rows * lp.cols <= SIMPLEX_MAX_ENTRIES => LpMethod::Simplex,
        LpMethod::Auto => LpMethod::InteriorPoint,
        m => m,
    };
    cert.method = method;
    let res = match method {
        LpMethod::InteriorPoint => ipm::solve(lp, &opts.ipm),
        _ => simplex::solve(lp, &opts.simplex),
    };
    cert.iterations += res.pivots;
    res
}

/// Solves `problem` (maximization) and verifies the primal solution.
pub fn solve(problem: &LpProblem, opts: &SolveOptions) -> Result<Certificate> {
    validate(problem)?;
    let red = reduce(problem);
    let mut cert = Certificate {
        problem: problem.name.clone(),
        status: LpStatus::Infeasible,
        optimum: f64::NAN,
        n_vars: problem.n_vars(),
        n_rows: problem.n_rows(),
        reduced_vars: red.n_free,
        reduced_rows: red.rows.len(),
        method: opts.method,
        iterations: 0,
        max_violation: f64::NAN,
        recomputed_optimum: f64::NAN,
        active_rows: 0,
        positivity_margin: None,
        seed_fixture: opts.seed_fixture.clone(),
        notes: Vec::new(),
        primal: Vec::new(),
    };
    if let Some(reason) = red.infeasible {
        cert.notes.push(reason);
        return Ok(cert);
    }
    let mut e = None;
    if !problem.fixed.is_empty() {
        let res = solve_dense(&margin_dual(&red), opts, &mut cert);
        if res.status != SimplexStatus::Optimal {
            cert.status = map_status(res.status);
            return Ok(cert);
        }
        let margin = -res.objective;
        cert.positivity_margin = Some(margin);
        if margin < -opts.simplex.tol {
            return Ok(cert);
        }
        if red.objective.iter().all(|&c| c == 0.0) {
            cert.optimum = red.objective_offset;
            e = Some(res.duals[..red.n_free].to_vec());
        }
    }
    let e = match e {
        Some(e) => e,
        None => {
            let res = solve_dense(&objective_dual(&red), opts, &mut cert);
            if res.status != SimplexStatus::Optimal {
                cert.status = map_status(res.status);
                return Ok(cert);
            }
            cert.optimum = -res.objective + red.objective_offset;
            res.duals
        }
    };
    cert.status = LpStatus::Optimal;
    cert.active_rows = red
        .rows
        .iter()
        .filter(|(coeffs, k)| k + coeffs.iter().map(|&(j, g)| g as f64 * e[j as usize]).sum::<f64>() <= 1e-9)
        .count();
    if !opts.skip_verification {
        let q = expand(problem, &red.slots, &e);
        let (viol, obj) = problem.check_solution(&q);
        cert.max_violation = viol;
        cert.recomputed_optimum = obj;
        if viol > 1e-8 || (obj - cert.optimum).abs() > 1e-8 {
            cert.notes.push(format!("primal check failed: violation {viol:e}, objective {obj} vs {}", cert.optimum));
        }
        cert.primal = q;
    }
    Ok(cert)
}

/// Maximum of `functional` over the no-signaling polytope of its parties.
pub fn max_over_nosignaling(functional: &BellFunctional) -> Result<Certificate> {
    let n = functional.n_parties;
    if n > 4 {
        return Err(invalid(format!("no-signaling LP supports at most 4 parties, got {n}")));
    }
    let shape = functional.settings_shape();
    let problem = LpProblem {
        name: format!("nosignaling_{}", functional.name),
        party_labels: (0..n).map(crate::netcore::type_letter).collect(),
        party_types: (0..n).collect(),
        settings: shape.iter().map(|&s| s.max(2)).collect(),
        objective: functional.terms.iter().map(|t| (t.coeff, t.settings.clone())).collect(),
        equalities: Vec::new(),
        fixed: Vec::new(),
    };
    solve(&problem, &SolveOptions::default())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Ablation {
    /// Remove every isomorphism equality from the inflation LP.
    pub drop_isomorphism: bool,
}

/// Solves the inflation LP for `S_n`; the optimum should equal `2(n-1)`.
pub fn certify_losr_bound(n: usize) -> Result<Certificate> {
    certify_losr_bound_with(n, Ablation::default(), &SolveOptions::default())
}

pub fn certify_losr_bound_with(n: usize, ablation: Ablation, opts: &SolveOptions) -> Result<Certificate> {
    let mut problem = build_theorem_lp(n)?;
    if ablation.drop_isomorphism {
        problem.equalities.clear();
        problem.name.push_str("_no_isomorphism");
    }
    let mut cert = solve(&problem, opts)?;
    let losr = bounds(n)?.losr;
    if cert.status == LpStatus::Optimal && cert.optimum > losr + 1e-6 {
        let needed = proof::required_families(n)?;
        let present = problem.families();
        let missing: Vec<String> = needed.into_iter().filter(|f| !present.contains(f)).collect();
        cert.notes.push(format!(
            "exceeds_analytic_bound: optimum {} > {losr}; isomorphism families used by the derivation but absent: {}",
            cert.optimum,
            if missing.is_empty() { "none".to_string() } else { missing.join(", ") }
        ));
    }
    Ok(cert)
}

/// Inflation LP with the unprimed block fixed to `table` (all correlators
/// of the original parties). Optimal status means the table is compatible
/// with the inflation constraints.
pub fn certify_table_compatibility(n: usize, table: &CorrelationTable, opts: &SolveOptions) -> Result<Certificate> {
    if table.n_parties() != n || table.settings_shape().iter().any(|&s| s != 2) {
        return Err(invalid("table must have n parties with two settings each"));
    }
    let mut problem = build_theorem_lp(n)?;
    problem.name.push_str("_fixed_table");
    let m = 2 * n;
    for code in 1..3usize.pow(n as u32) {
        let mut c = code;
        let mut p: Pattern = vec![None; m];
        for slot in p.iter_mut().take(n) {
            *slot = match c % 3 {
                0 => None,
                s => Some(s - 1),
            };
            c /= 3;
        }
        let value = table.correlator(&p[..n])?;
        problem.fixed.push((p, value));
    }
    solve(&problem, opts)
}

/// Outcome of checking an explicit joint table over the `2n` LP parties.
#[derive(Clone, Debug, Serialize)]
pub struct JointCheck {
    pub no_signaling_violation: f64,
    /// Families whose equalities fail, with the largest discrepancy.
    pub violated_families: Vec<(String, f64)>,
}

impl JointCheck {
    pub fn feasible(&self) -> bool {
        self.no_signaling_violation <= 1e-10 && self.violated_families.is_empty()
    }
}

/// Checks whether an explicit joint distribution satisfies the LP's
/// no-signaling and isomorphism constraints.
pub fn check_joint(problem: &LpProblem, joint: &CorrelationTable) -> Result<JointCheck> {
    if joint.n_parties() != problem.n_parties() {
        return Err(Error::DimensionMismatch { expected: problem.n_parties(), got: joint.n_parties() });
    }
    let mut worst: Vec<(String, f64)> = Vec::new();
    for eq in &problem.equalities {
        let d = (joint.correlator(&eq.lhs)? - joint.correlator(&eq.rhs)?).abs();
        if d > 1e-10 {
            match worst.iter_mut().find(|(f, _)| *f == eq.family) {
                Some(entry) => entry.1 = entry.1.max(d),
                None => worst.push((eq.family.clone(), d)),
            }
        }
    }
    Ok(JointCheck { no_signaling_violation: joint.no_signaling_violation(), violated_families: worst })
}

/// Product distribution of two tables (parties of `first`, then `second`).
pub fn product_table(first: &CorrelationTable, second: &CorrelationTable) -> Result<CorrelationTable> {
    let (n1, n2) = (first.n_parties(), second.n_parties());
    let mut shape = first.settings_shape().to_vec();
    shape.extend_from_slice(second.settings_shape());
    CorrelationTable::from_fn(shape, |x, a| {
        let p = first.distribution(&x[..n1]).expect("setting in range")[a >> n2];
        let q = second.distribution(&x[n1..]).expect("setting in range")[a & ((1 << n2) - 1)];
        p * q
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellfunc::{chsh, noise_threshold, s_functional};
    use crate::quantum::{correlation_table, ghz, standard_settings};

    #[test]
    fn chsh_nosignaling_max_is_four() {
        let c = max_over_nosignaling(&chsh()).unwrap();
        assert_eq!(c.status, LpStatus::Optimal);
        assert!((c.optimum - 4.0).abs() < 1e-9);
        assert!(c.max_violation < 1e-8);
    }

    #[test]
    fn s3_nosignaling_max_is_six() {
        let c = max_over_nosignaling(&s_functional(3).unwrap()).unwrap();
        assert!((c.optimum - 6.0).abs() < 1e-9, "{}", c.optimum);
        assert!((c.recomputed_optimum - c.optimum).abs() < 1e-8);
    }

    #[test]
    fn theorem_lp_n3_gives_losr_bound() {
        let c = certify_losr_bound(3).unwrap();
        assert_eq!(c.status, LpStatus::Optimal);
        assert!((c.optimum - 4.0).abs() < 1e-6, "{}", c.optimum);
        assert!(c.max_violation < 1e-8, "{}", c.max_violation);
        assert!(c.notes.is_empty(), "{:?}", c.notes);
    }

    #[test]
    fn dropping_isomorphism_recovers_nosignaling_value() {
        let c = certify_losr_bound_with(3, Ablation { drop_isomorphism: true }, &SolveOptions::default()).unwrap();
        assert!((c.optimum - 6.0).abs() < 1e-6, "{}", c.optimum);
        assert!(c.notes.iter().any(|n| n.starts_with("exceeds_analytic_bound")));
    }

    #[test]
    fn nosignaling_s4_reaches_coefficient_sum() {
        let c = max_over_nosignaling(&s_functional(4).unwrap()).unwrap();
        assert!((c.optimum - 8.0).abs() < 1e-9, "{}", c.optimum);
    }

    #[test]
    fn ghz_copies_break_the_bw_family() {
        let n = 3;
        let t = correlation_table(&ghz(n).unwrap(), &standard_settings(n).unwrap()).unwrap();
        let joint = product_table(&t, &t).unwrap();
        let check = check_joint(&build_theorem_lp(n).unwrap(), &joint).unwrap();
        assert!(check.no_signaling_violation < 1e-10);
        assert!(!check.feasible());
        assert!(check.violated_families.iter().any(|(f, _)| f == "{B,C'}~{B',C'}"));
    }

    #[test]
    fn deterministic_copies_are_feasible() {
        let det = CorrelationTable::from_fn(vec![2, 2, 2], |_, a| if a == 0 { 1.0 } else { 0.0 }).unwrap();
        let joint = product_table(&det, &det).unwrap();
        assert!(check_joint(&build_theorem_lp(3).unwrap(), &joint).unwrap().feasible());
    }

    #[test]
    fn noisy_ghz_tables_against_inflation() {
        let n = 3;
        let eta = noise_threshold(n).unwrap();
        let table = |v: f64| {
            correlation_table(&ghz(n).unwrap().with_visibility(v).unwrap(), &standard_settings(n).unwrap()).unwrap()
        };
        let above = certify_table_compatibility(n, &table(eta + 0.01), &SolveOptions::default()).unwrap();
        assert_eq!(above.status, LpStatus::Infeasible);
        let below = certify_table_compatibility(n, &table(eta - 0.01), &SolveOptions::default()).unwrap();
        assert_eq!(below.status, LpStatus::Optimal, "{:?}", below.notes);
    }

    #[test]
    fn theorem_lp_n4_gives_losr_bound() {
        let c = certify_losr_bound(4).unwrap();
        assert_eq!(c.status, LpStatus::Optimal);
        assert_eq!(c.method, LpMethod::InteriorPoint);
        assert!((c.optimum - 6.0).abs() < 1e-6, "{}", c.optimum);
        assert!(c.max_violation < 1e-8, "{}", c.max_violation);
    }

    #[test]
    fn simplex_and_interior_point_agree() {
        for method in [LpMethod::Simplex, LpMethod::InteriorPoint] {
            let opts = SolveOptions { method, ..SolveOptions::default() };
            let c = certify_losr_bound_with(3, Ablation::default(), &opts).unwrap();
            assert_eq!(c.method, method);
            assert!((c.optimum - 4.0).abs() < 1e-7, "{method:?}: {}", c.optimum);
        }
    }
}
