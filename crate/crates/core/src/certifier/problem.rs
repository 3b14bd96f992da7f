//! Probability-form LP over a set of parties with binary outcomes.
//!
//! Variables are `q(a|x)` for every setting tuple `x` and outcome tuple `a`,
//! indexed `x_index * 2^m + a_index` with the outcome/setting conventions of
//! [`CorrelationTable`]. Constraints are stored structurally (objective,
//! correlator equalities, fixed correlators); [`LpProblem::constraint_rows`]
//! materializes them as sparse rows.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::bellfunc::s_functional;
use crate::error::{invalid, Result};
use crate::netcore::{build_theorem_inflation, isomorphism_classes_within, InflationSpec, PartyPair};
use crate::quantum::CorrelationTable;

/// Setting per LP party, `None` for a marginalized party.
pub type Pattern = Vec<Option<usize>>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelatorEquality {
    pub lhs: Pattern,
    pub rhs: Pattern,
    /// Isomorphism family, e.g. `{B,C'}~{B',C'}`.
    pub family: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub name: String,
    pub party_labels: Vec<String>,
    /// Flip-symmetry type of each party (inflation copies share a type).
    pub party_types: Vec<usize>,
    pub settings: Vec<usize>,
    /// Maximized: `Σ coeff * <pattern>`.
    pub objective: Vec<(f64, Pattern)>,
    pub equalities: Vec<CorrelatorEquality>,
    pub fixed: Vec<(Pattern, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowFamily {
    Normalization,
    NoSignaling,
    Isomorphism,
    Fixed,
}

#[derive(Clone, Debug)]
pub struct SparseRow {
    pub family: RowFamily,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LpProblem {
    pub fn n_parties(&self) -> usize {
        self.party_labels.len()
    }

    pub fn n_setting_tuples(&self) -> usize {
        self.settings.iter().product()
    }

    pub fn n_vars(&self) -> usize {
        self.n_setting_tuples() << self.n_parties()
    }

    pub fn n_normalization_rows(&self) -> usize {
        self.n_setting_tuples()
    }

    pub fn n_nosignaling_rows(&self) -> usize {
        let m = self.n_parties();
        let tuples = self.n_setting_tuples();
        (0..m).map(|i| (tuples / self.settings[i] * (self.settings[i] - 1)) << (m - 1)).sum()
    }

    pub fn n_rows(&self) -> usize {
        self.n_normalization_rows() + self.n_nosignaling_rows() + self.equalities.len() + self.fixed.len()
    }

    pub fn var_index(&self, x: &[usize], a: usize) -> usize {
        let mut t = 0;
        for (&s, &v) in self.settings.iter().zip(x) {
            t = t * s + v;
        }
        (t << self.n_parties()) | a
    }

    pub fn var_name(&self, index: usize) -> String {
        let m = self.n_parties();
        let a = index & ((1 << m) - 1);
        let x = CorrelationTable::decode_settings(&self.settings, index >> m);
        let abits: String = (0..m).map(|i| if (a >> (m - 1 - i)) & 1 == 1 { '1' } else { '0' }).collect();
        let xbits: String = x.iter().map(|v| char::from_digit(*v as u32, 10).unwrap_or('?')).collect();
        format!("q[{abits}|{xbits}]")
    }

    pub fn pattern_label(&self, p: &Pattern) -> String {
        let parts: Vec<String> =
            p.iter().enumerate().filter_map(|(i, s)| s.map(|s| format!("{}{s}", self.party_labels[i]))).collect();
        format!("<{}>", parts.join(" "))
    }

    /// Correlator of `pattern` as sparse coefficients on `q`, evaluated at
    /// the setting tuple with marginalized parties at setting 0.
    pub fn correlator_row(&self, pattern: &Pattern) -> Vec<(usize, f64)> {
        let m = self.n_parties();
        let x: Vec<usize> = pattern.iter().map(|s| s.unwrap_or(0)).collect();
        let mask = pattern
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_some())
            .fold(0usize, |acc, (i, _)| acc | 1 << (m - 1 - i));
        (0..1usize << m)
            .map(|a| (self.var_index(&x, a), if (a & mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 }))
            .collect()
    }

    pub fn constraint_rows(&self) -> Vec<SparseRow> {
        let m = self.n_parties();
        let dim = 1usize << m;
        let mut rows = Vec::with_capacity(self.n_rows());
        for t in 0..self.n_setting_tuples() {
            rows.push(SparseRow {
                family: RowFamily::Normalization,
                coeffs: (0..dim).map(|a| ((t << m) | a, 1.0)).collect(),
                rhs: 1.0,
            });
        }
        for i in 0..m {
            let bit = 1usize << (m - 1 - i);
            for t in 0..self.n_setting_tuples() {
                let x = CorrelationTable::decode_settings(&self.settings, t);
                if x[i] + 1 >= self.settings[i] {
                    continue;
                }
                let mut y = x.clone();
                y[i] += 1;
                for a in (0..dim).filter(|a| a & bit == 0) {
                    rows.push(SparseRow {
                        family: RowFamily::NoSignaling,
                        coeffs: vec![
                            (self.var_index(&x, a), 1.0),
                            (self.var_index(&x, a | bit), 1.0),
                            (self.var_index(&y, a), -1.0),
                            (self.var_index(&y, a | bit), -1.0),
                        ],
                        rhs: 0.0,
                    });
                }
            }
        }
        for eq in &self.equalities {
            let mut coeffs = self.correlator_row(&eq.lhs);
            coeffs.extend(self.correlator_row(&eq.rhs).into_iter().map(|(v, c)| (v, -c)));
            rows.push(SparseRow { family: RowFamily::Isomorphism, coeffs, rhs: 0.0 });
        }
        for (p, v) in &self.fixed {
            rows.push(SparseRow { family: RowFamily::Fixed, coeffs: self.correlator_row(p), rhs: *v });
        }
        rows
    }

    /// Objective as sparse coefficients on `q`.
    pub fn objective_row(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (c, p) in &self.objective {
            out.extend(self.correlator_row(p).into_iter().map(|(v, s)| (v, c * s)));
        }
        out
    }

    /// Largest violation of any materialized row or of positivity by `q`,
    /// and the objective value of `q`.
    pub fn check_solution(&self, q: &[f64]) -> (f64, f64) {
        let mut worst = q.iter().fold(0.0f64, |w, &v| w.max(-v));
        for row in self.constraint_rows() {
            let lhs: f64 = row.coeffs.iter().map(|&(v, c)| c * q[v]).sum();
            worst = worst.max((lhs - row.rhs).abs());
        }
        let obj = self.objective_row().iter().map(|&(v, c)| c * q[v]).sum();
        (worst, obj)
    }

    /// Plain-text LP: objective row, constraint rows, nonnegative bounds.
    pub fn write_lp_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "\\ {}", self.name)?;
        writeln!(w, "\\ parties: {}", self.party_labels.join(" "))?;
        writeln!(w, "maximize")?;
        writeln!(w, " obj: {}", self.format_terms(&self.objective_row()))?;
        writeln!(w, "subject to")?;
        for (k, row) in self.constraint_rows().iter().enumerate() {
            let tag = match row.family {
                RowFamily::Normalization => "norm",
                RowFamily::NoSignaling => "ns",
                RowFamily::Isomorphism => "iso",
                RowFamily::Fixed => "fix",
            };
            writeln!(w, " {tag}_{k}: {} = {}", self.format_terms(&row.coeffs), row.rhs)?;
        }
        writeln!(w, "bounds")?;
        writeln!(w, " q >= 0")?;
        writeln!(w, "end")?;
        Ok(())
    }

    fn format_terms(&self, coeffs: &[(usize, f64)]) -> String {
        let mut s = String::new();
        for &(v, c) in coeffs {
            let _ = write!(s, "{}{} {} ", if c < 0.0 { "-" } else { "+" }, c.abs(), self.var_name(v));
        }
        s.trim_end().to_string()
    }

    /// Names of the isomorphism families present in the problem.
    pub fn families(&self) -> BTreeSet<String> {
        self.equalities.iter().map(|e| e.family.clone()).collect()
    }
}

fn pair_label(spec: &InflationSpec, (a, b): PartyPair) -> String {
    format!("{{{},{}}}", spec.party_label(a), spec.party_label(b))
}

pub(crate) fn family_label(spec: &InflationSpec, p: PartyPair, q: PartyPair) -> String {
    format!("{}~{}", pair_label(spec, p), pair_label(spec, q))
}

/// Correlator equalities implied by every isomorphism class among parties
/// `0..limit` of `spec`, deduplicated. Each member of a class is tied to the
/// first member for every pair of settings, together with the two
/// single-party marginals.
pub fn isomorphism_equalities(spec: &InflationSpec, limit: usize, settings: usize) -> Vec<CorrelatorEquality> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let pattern = |entries: &[(usize, usize)]| {
        let mut p = vec![None; limit];
        for &(i, s) in entries {
            p[i] = Some(s);
        }
        p
    };
    for class in isomorphism_classes_within(spec, limit) {
        let rep = class[0];
        for &member in &class[1..] {
            let family = family_label(spec, rep, member);
            for s in 0..settings {
                for t in 0..settings {
                    let candidates = [
                        (pattern(&[(rep.0, s), (rep.1, t)]), pattern(&[(member.0, s), (member.1, t)])),
                        (pattern(&[(rep.0, s)]), pattern(&[(member.0, s)])),
                        (pattern(&[(rep.1, t)]), pattern(&[(member.1, t)])),
                    ];
                    for (l, r) in candidates {
                        if l == r {
                            continue;
                        }
                        let key = if l <= r { (l.clone(), r.clone()) } else { (r.clone(), l.clone()) };
                        if seen.insert(key) {
                            out.push(CorrelatorEquality { lhs: l, rhs: r, family: family.clone() });
                        }
                    }
                }
            }
        }
    }
    out
}

/// LP over the unprimed and primed copies of the order-3 inflation: no
/// signaling everywhere, isomorphism equalities from the inflation's
/// classes, objective `S_n` on the unprimed copy.
pub fn build_theorem_lp(n: usize) -> Result<LpProblem> {
    if !(3..=4).contains(&n) {
        return Err(invalid(format!("the inflation LP is built for n in {{3, 4}}, got {n}")));
    }
    let spec = build_theorem_inflation(n)?;
    let m = 2 * n;
    let functional = s_functional(n)?;
    let objective = functional
        .terms
        .iter()
        .map(|t| {
            let mut p = t.settings.clone();
            p.resize(m, None);
            (t.coeff, p)
        })
        .collect();
    Ok(LpProblem {
        name: format!("inflation_lp_n{n}"),
        party_labels: (0..m).map(|i| spec.party_label(i)).collect(),
        party_types: (0..m).map(|i| spec.type_of(i)).collect(),
        settings: vec![2; m],
        objective,
        equalities: isomorphism_equalities(&spec, m, 2),
        fixed: Vec::new(),
    })
}
