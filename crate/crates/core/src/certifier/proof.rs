//! Step-by-step check of the analytic derivation of `S_N <= 2(N-1)`.
//!
//! (a) The no-signaling triangle inequality `<UV> >= <UW> + <VW> - 1`.
//! (b) Positivity of two events in the joint of `A_1, B_y, C_1..W_1, W'_0`
//!     expands exactly (integer arithmetic) to
//!     `2 - <A_1(B_0-B_1)C_1..W_1> - <(B_0+B_1)W'_0> >= 0`.
//! (c) Every correlator substitution is backed by a two-party isomorphism of
//!     the inflation.
//! (d) The weighted sum of (b), the triangle inequalities and the
//!     substitutions equals `2(N-1) - S_N` coefficient by coefficient.

use std::collections::BTreeMap;

use serde::Serialize;

use super::problem::{family_label, LpProblem};
use super::{solve, LpStatus, SolveOptions};
use crate::bellfunc::s_functional;
use crate::error::{invalid, Result};
use crate::netcore::{
    are_isomorphic, build_theorem_inflation, isomorphism_classes_within, oracle_isomorphic, InflationSpec, PartyPair,
};

#[derive(Clone, Debug, Serialize)]
pub struct ProofStep {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProofReport {
    pub n: usize,
    pub steps: Vec<ProofStep>,
}

impl ProofReport {
    pub fn passed(&self) -> bool {
        self.steps.iter().all(|s| s.passed)
    }

    pub fn failed_steps(&self) -> Vec<&str> {
        self.steps.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect()
    }
}

/// A correlator: sorted `(party label, setting)` factors. The empty key is
/// the constant term.
type Key = Vec<(String, usize)>;

/// Linear form in correlators with integer coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
struct Form(BTreeMap<Key, i64>);

impl Form {
    fn add(&mut self, key: Key, c: i64) {
        let mut key = key;
        key.sort();
        let e = self.0.entry(key.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.0.remove(&key);
        }
    }

    fn add_form(&mut self, other: &Form, scale: i64) {
        for (k, c) in &other.0 {
            self.add(k.clone(), c * scale);
        }
    }

    fn rename(&self, from: &Key, to: &Key) -> Form {
        let mut out = Form::default();
        for (k, c) in &self.0 {
            out.add(if k == from { to.clone() } else { k.clone() }, *c);
        }
        out
    }

    fn render(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, c)| {
                if k.is_empty() {
                    format!("{c:+}")
                } else {
                    let body: Vec<String> = k.iter().map(|(l, s)| format!("{l}{s}")).collect();
                    format!("{c:+}<{}>", body.join(""))
                }
            })
            .collect();
        parts.join(" ")
    }
}

fn key(factors: &[(&str, usize)]) -> Key {
    let mut k: Key = factors.iter().map(|(l, s)| (l.to_string(), *s)).collect();
    k.sort();
    k
}

fn labels(n: usize) -> Result<(InflationSpec, Vec<String>, Vec<String>)> {
    let spec = build_theorem_inflation(n)?;
    let un: Vec<String> = (0..n).map(|i| spec.party_label(i)).collect();
    let pr: Vec<String> = (n..2 * n).map(|i| spec.party_label(i)).collect();
    Ok((spec, un, pr))
}

/// Pairs `[(inflation pair, original pair)]` the derivation substitutes:
/// `{B,W'}~{B',W'}`, `{A',B'}~{A,B}` and `{X',Y'}~{X,Y}` along the chain
/// `A, C, D, ..., W`.
fn substitutions(n: usize) -> Vec<(PartyPair, PartyPair)> {
    let p = |i: usize| n + i;
    let w = n - 1;
    let mut subs = vec![((1, p(w)), (p(1), p(w))), ((p(0), p(1)), (0, 1))];
    let chain: Vec<usize> = std::iter::once(0).chain(2..n).collect();
    for link in chain.windows(2) {
        subs.push(((p(link[0]), p(link[1])), (link[0], link[1])));
    }
    subs
}

/// LP family labels that tie together the pairs used by the derivation.
pub(crate) fn required_families(n: usize) -> Result<Vec<String>> {
    let spec = build_theorem_inflation(n)?;
    let classes = isomorphism_classes_within(&spec, 2 * n);
    let mut out = Vec::new();
    for (p, q) in substitutions(n) {
        for pair in [p, q] {
            if let Some(class) = classes.iter().find(|c| c.contains(&pair)) {
                if class[0] != pair {
                    out.push(family_label(&spec, class[0], pair));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn step_a() -> Result<ProofStep> {
    // maximize -( <U0V0> - <U0W0> - <V0W0> ) over 3-party 2-setting boxes
    let pat = |u: Option<usize>, v: Option<usize>, w: Option<usize>| vec![u, v, w];
    let problem = LpProblem {
        name: "triangle_ns".into(),
        party_labels: vec!["U".into(), "V".into(), "W".into()],
        party_types: vec![0, 1, 2],
        settings: vec![2, 2, 2],
        objective: vec![
            (-1.0, pat(Some(0), Some(0), None)),
            (1.0, pat(Some(0), None, Some(0))),
            (1.0, pat(None, Some(0), Some(0))),
        ],
        equalities: vec![],
        fixed: vec![],
    };
    let cert = solve(&problem, &SolveOptions::default())?;
    let lp_min = -cert.optimum;
    let det_min = (0..8u32)
        .map(|s| {
            let v = |i: u32| if s >> i & 1 == 1 { -1i64 } else { 1 };
            v(0) * v(1) - v(0) * v(2) - v(1) * v(2)
        })
        .min()
        .unwrap_or(0);
    let passed = cert.status == LpStatus::Optimal && (lp_min + 1.0).abs() < 1e-9 && det_min == -1;
    Ok(ProofStep {
        name: "a: no-signaling triangle inequality".into(),
        passed,
        detail: format!(
            "LP over {} probability variables: min <UV>-<UW>-<VW> = {lp_min}; deterministic minimum {det_min}",
            problem.n_vars()
        ),
    })
}

/// Integer expansion of `Σ_y Σ_{a in E_y} q(a | A1 B_y C1..W1 W'0)` scaled by
/// `2^(n+1)`, with `E_y = {b = -w', a = (-1)^y c~ w'}`.
fn positivity_expansion(un: &[String], pr: &[String]) -> Form {
    let n = un.len();
    let k = n + 1; // A, B, C..W, W'
    let mut total = Form::default();
    for y in 0..2usize {
        let factor = |i: usize| -> (&str, usize) {
            match i {
                0 => (un[0].as_str(), 1),
                1 => (un[1].as_str(), y),
                i if i < n => (un[i].as_str(), 1),
                _ => (pr[n - 1].as_str(), 0),
            }
        };
        for subset in 0..1u32 << k {
            let mut coef = 0i64;
            for a in 0..1u32 << k {
                let out = |i: usize| if a >> i & 1 == 1 { -1i64 } else { 1 };
                let c_tilde: i64 = (2..n).map(out).product();
                let (av, bv, wv) = (out(0), out(1), out(n));
                let sign_y = if y == 0 { 1 } else { -1 };
                if bv == -wv && av == sign_y * c_tilde * wv {
                    let chi: i64 = (0..k).filter(|&i| subset >> i & 1 == 1).map(out).product();
                    coef += chi;
                }
            }
            if coef != 0 {
                let factors: Vec<(&str, usize)> = (0..k).filter(|&i| subset >> i & 1 == 1).map(factor).collect();
                total.add(key(&factors), coef);
            }
        }
    }
    total
}

fn expected_step_b(un: &[String], pr: &[String]) -> Form {
    // 2^(n+1)/4 * (2 - <A1 B0 C~> + <A1 B1 C~> - <B0 W'0> - <B1 W'0>)
    let n = un.len();
    let unit = 1i64 << (n + 1 - 2);
    let mut f = Form::default();
    f.add(vec![], 2 * unit);
    for (y, sign) in [(0usize, -1i64), (1, 1)] {
        let mut fac: Vec<(&str, usize)> = vec![(&un[0], 1), (&un[1], y)];
        fac.extend((2..n).map(|i| (un[i].as_str(), 1)));
        f.add(key(&fac), sign * unit);
        f.add(key(&[(&un[1], y), (&pr[n - 1], 0)]), -unit);
    }
    f
}

fn step_b(un: &[String], pr: &[String]) -> (ProofStep, Form) {
    let got = positivity_expansion(un, pr);
    let want = expected_step_b(un, pr);
    let passed = got == want;
    let step = ProofStep {
        name: "b: positivity expansion".into(),
        passed,
        detail: if passed {
            format!("exact integer match (scale 2^{}): {}", un.len() + 1, got.render())
        } else {
            format!("expansion {} differs from expected {}", got.render(), want.render())
        },
    };
    (step, got)
}

fn step_c(n: usize, spec: &InflationSpec) -> Result<ProofStep> {
    let classes = isomorphism_classes_within(spec, 2 * n);
    let mut bad = Vec::new();
    let mut used = Vec::new();
    for (p, q) in substitutions(n) {
        let same_class = classes.iter().any(|c| c.contains(&p) && c.contains(&q));
        let ok = are_isomorphic(spec, p, q)? && oracle_isomorphic(spec, p, q)? && same_class;
        let label = family_label(spec, p, q);
        if ok {
            used.push(label);
        } else {
            bad.push(label);
        }
    }
    Ok(ProofStep {
        name: "c: isomorphism substitutions".into(),
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("confirmed {}", used.join(", "))
        } else {
            format!("not isomorphic: {}", bad.join(", "))
        },
    })
}

fn step_d(n: usize, un: &[String], pr: &[String], expansion: &Form) -> Result<ProofStep> {
    let scale = 1i64 << (n + 1 - 2); // expansion carries 2^(n+1)/4 per unit
    let mut total = expansion.clone();
    let chain: Vec<usize> = std::iter::once(0).chain(2..n).collect();
    let w = n - 1;
    // triangle inequalities <UV> - <UW> - <VW> + 1 >= 0 among primed parties
    let triangle = |u: (&str, usize), v: (&str, usize), wv: (&str, usize)| {
        let mut f = Form::default();
        f.add(key(&[u, v]), 1);
        f.add(key(&[u, wv]), -1);
        f.add(key(&[v, wv]), -1);
        f.add(vec![], 1);
        f
    };
    for y in 0..2 {
        total.add_form(&triangle((&pr[1], y), (&pr[w], 0), (&pr[0], 0)), scale);
        for link in chain.windows(2) {
            if link[1] == w {
                break;
            }
            total.add_form(&triangle((&pr[link[0]], 0), (&pr[w], 0), (&pr[link[1]], 0)), scale);
        }
    }
    // substitutions, each backed by step (c)
    for y in 0..2 {
        total = total.rename(&key(&[(&un[1], y), (&pr[w], 0)]), &key(&[(&pr[1], y), (&pr[w], 0)]));
        total = total.rename(&key(&[(&pr[0], 0), (&pr[1], y)]), &key(&[(&un[0], 0), (&un[1], y)]));
    }
    for link in chain.windows(2) {
        total = total.rename(
            &key(&[(&pr[link[0]], 0), (&pr[link[1]], 0)]),
            &key(&[(&un[link[0]], 0), (&un[link[1]], 0)]),
        );
    }
    // target: 2(N-1) - S_N, same scale
    let mut target = Form::default();
    target.add(vec![], 2 * (n as i64 - 1) * scale);
    for t in &s_functional(n)?.terms {
        let fac: Vec<(&str, usize)> = t.present().map(|(p, s)| (un[p].as_str(), s)).collect();
        target.add(key(&fac), -(t.coeff as i64) * scale);
    }
    let passed = total == target;
    Ok(ProofStep {
        name: "d: assembly".into(),
        passed,
        detail: if passed {
            format!("sum of steps equals 2(N-1) - S_N = {}", target.render())
        } else {
            format!("sum of steps {} differs from 2(N-1) - S_N = {}", total.render(), target.render())
        },
    })
}

pub fn verify_proof_chain(n: usize) -> Result<ProofReport> {
    if n < 3 {
        return Err(invalid(format!("the derivation needs n >= 3, got {n}")));
    }
    if n > 10 {
        return Err(invalid(format!("symbolic expansion is capped at n = 10, got {n}")));
    }
    let (spec, un, pr) = labels(n)?;
    let mut steps = vec![step_a()?];
    let (b, expansion) = step_b(&un, &pr);
    steps.push(b);
    steps.push(step_c(n, &spec)?);
    steps.push(step_d(n, &un, &pr, &expansion)?);
    Ok(ProofReport { n, steps })
}
