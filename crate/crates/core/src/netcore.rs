//! Incidence-matrix representation of networks and their non-fan-out
//! inflations, plus the XOR-signature test for two-party subnetwork
//! isomorphism.
//!
//! A network of `N` parties is connected by `N` resources, resource `j`
//! being shared by every party except party `j`. Rows of the incidence
//! matrix are parties and columns are resources, both in the canonical order
//! `A, B, C, ...`. An inflation of order `k` has `kN` parties and `kN`
//! resources; index `i` has type `i mod N` and copy `i / N` (unprimed,
//! primed, double-primed, ...).

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};

/// Dense 0/1 matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(invalid(format!("row {i} has {} entries, expected {n_cols}", row.len())));
            }
            if let Some(v) = row.iter().find(|&&v| v > 1) {
                return Err(invalid(format!("row {i} contains non-binary entry {v}")));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: n_rows, cols: n_cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.data[r * self.cols + c] = v as u8;
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_sum(&self, r: usize) -> usize {
        self.row(r).iter().map(|&v| v as usize).sum()
    }

    pub fn col_sum(&self, c: usize) -> usize {
        (0..self.rows).map(|r| self.get(r, c) as usize).sum()
    }

    /// Returns a copy with entry `(r, c)` toggled.
    pub fn flipped(&self, r: usize, c: usize) -> Self {
        let mut m = self.clone();
        let v = m.get(r, c) == 0;
        m.set(r, c, v);
        m
    }
}

/// Letter for party type `t`: `A`, `B`, ... (falls back to `P<t>` past `Z`).
pub fn type_letter(t: usize) -> String {
    if t < 26 {
        char::from(b'A' + t as u8).to_string()
    } else {
        format!("P{t}")
    }
}

fn copy_label(base: String, copy: usize) -> String {
    base + &"'".repeat(copy)
}

/// The original network: `N` parties, resource `j` shared by all parties but `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkSpec {
    pub n_parties: usize,
    pub incidence: BinaryMatrix,
    pub party_labels: Vec<String>,
    pub resource_labels: Vec<String>,
}

/// Builds the complete `n`-party network with `Γ_ij = 1 - δ_ij`.
pub fn build_complete_network(n: usize) -> Result<NetworkSpec> {
    if n < 3 {
        return Err(invalid(format!("a network needs at least 3 parties, got {n}")));
    }
    let mut incidence = BinaryMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            incidence.set(i, j, i != j);
        }
    }
    Ok(NetworkSpec {
        n_parties: n,
        incidence,
        party_labels: (0..n).map(type_letter).collect(),
        resource_labels: (0..n).map(|t| format!("~{}", type_letter(t))).collect(),
    })
}

/// A `kN x kN` inflation of an `N`-party network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InflationSpec {
    pub n_types: usize,
    pub order: usize,
    pub incidence: BinaryMatrix,
}

impl InflationSpec {
    pub fn new(n_types: usize, order: usize, incidence: BinaryMatrix) -> Result<Self> {
        if n_types == 0 || order == 0 {
            return Err(invalid("inflation needs positive N and k"));
        }
        let size = n_types * order;
        if incidence.rows() != size || incidence.cols() != size {
            return Err(invalid(format!(
                "incidence matrix is {}x{}, expected {size}x{size}",
                incidence.rows(),
                incidence.cols()
            )));
        }
        Ok(Self { n_types, order, incidence })
    }

    /// The original network viewed as an order-1 inflation.
    pub fn from_network(net: &NetworkSpec) -> Self {
        Self { n_types: net.n_parties, order: 1, incidence: net.incidence.clone() }
    }

    pub fn size(&self) -> usize {
        self.n_types * self.order
    }

    #[inline]
    pub fn type_of(&self, index: usize) -> usize {
        index % self.n_types
    }

    #[inline]
    pub fn copy_of(&self, index: usize) -> usize {
        index / self.n_types
    }

    pub fn index_of(&self, type_id: usize, copy: usize) -> usize {
        copy * self.n_types + type_id
    }

    pub fn party_label(&self, index: usize) -> String {
        copy_label(type_letter(self.type_of(index)), self.copy_of(index))
    }

    pub fn resource_label(&self, index: usize) -> String {
        copy_label(format!("~{}", type_letter(self.type_of(index))), self.copy_of(index))
    }

    /// Looks up a party by label such as `B` or `C''`.
    pub fn party_index(&self, label: &str) -> Result<usize> {
        (0..self.size())
            .find(|&i| self.party_label(i) == label.trim())
            .ok_or_else(|| invalid(format!("unknown party label {label:?}")))
    }

    /// Upper-left `N x N` block (the unprimed copy).
    pub fn unprimed_block(&self) -> BinaryMatrix {
        let n = self.n_types;
        let mut m = BinaryMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.incidence.get(i, j) == 1);
            }
        }
        m
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.size() {
            return Err(invalid(format!("party index {i} out of range 0..{}", self.size())));
        }
        Ok(())
    }

    /// Plain-text form: `N k`, then `kN` rows of space-separated digits and
    /// trailing `#` label lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n_types, self.order);
        for r in 0..self.size() {
            let row: Vec<String> = self.incidence.row(r).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        let parties: Vec<String> = (0..self.size()).map(|i| self.party_label(i)).collect();
        let resources: Vec<String> = (0..self.size()).map(|i| self.resource_label(i)).collect();
        let _ = writeln!(out, "# parties: {}", parties.join(" "));
        let _ = writeln!(out, "# resources: {}", resources.join(" "));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: hline, msg: format!("bad header: {e}") })?;
        let [n, k] = dims[..] else {
            return Err(Error::Parse { line: hline, msg: "header must be `N k`".into() });
        };
        if n == 0 || k == 0 {
            return Err(Error::Parse { line: hline, msg: "N and k must be positive".into() });
        }
        let size = n * k;
        let mut rows = Vec::with_capacity(size);
        for (lineno, line) in lines {
            if rows.len() == size {
                return Err(Error::Parse { line: lineno, msg: "extra row after matrix".into() });
            }
            let row: Vec<u8> = line
                .split_whitespace()
                .map(|tok| match tok {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::Parse { line: lineno, msg: format!("entry {other:?} is not 0/1") }),
                })
                .collect::<Result<_>>()?;
            if row.len() != size {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("row has {} entries, expected {size}", row.len()),
                });
            }
            rows.push(row);
        }
        if rows.len() != size {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: format!("found {} rows, expected {size}", rows.len()),
            });
        }
        Self::new(n, k, BinaryMatrix::from_rows(&rows)?)
    }
}

/// Builds the order-3 inflation used to derive the `N`-party LOSR bound.
///
/// The unprimed block is the original network. The primed and double-primed
/// copies form the order-2 inflation whose upper triangle (in the order
/// `B, A, C, D, ..., W`) is filled: primed party `k` holds every primed
/// resource `j < k`, the primed `~W` (unless it is `W'`) and the doubly-primed
/// resources strictly between `k` and `W`; the double-primed block mirrors
/// this. The `A`/`B` exchange is undone before returning, so indices follow
/// the canonical order.
pub fn build_theorem_inflation(n: usize) -> Result<InflationSpec> {
    build_complete_network(n)?;
    let size = 3 * n;
    // swap A <-> B within each copy
    let swap = |t: usize| match t {
        0 => 1,
        1 => 0,
        t => t,
    };
    let last = n - 1;
    let exchanged = |row: usize, col: usize| -> bool {
        let (rc, rk) = (row / n, row % n);
        let (cc, cj) = (col / n, col % n);
        match (rc, cc) {
            (0, 0) => rk != cj,
            (1, 1) | (2, 2) => cj < rk || (cj == last && rk != last),
            (1, 2) | (2, 1) => rk < cj && cj < last,
            _ => false,
        }
    };
    let mut incidence = BinaryMatrix::zeros(size, size);
    for r in 0..size {
        for c in 0..size {
            let (rc, rt) = (r / n, r % n);
            let (cc, ct) = (c / n, c % n);
            let v = exchanged(rc * n + swap(rt), cc * n + swap(ct));
            incidence.set(r, c, v);
        }
    }
    InflationSpec::new(n, 3, incidence)
}

/// Per-invariant outcome of [`validate_inflation`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidityReport {
    /// Rows whose number of ones differs from `N - 1`.
    pub bad_rows: Vec<usize>,
    /// Columns whose number of ones differs from `N - 1`.
    pub bad_cols: Vec<usize>,
    /// `(row, resource type)` pairs violating the one-per-type rule (own type
    /// must have zero ones, every other type exactly one).
    pub bad_row_types: Vec<(usize, usize)>,
    /// `(column, party type)` pairs violating the one-per-type rule.
    pub bad_col_types: Vec<(usize, usize)>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.bad_rows.is_empty()
            && self.bad_cols.is_empty()
            && self.bad_row_types.is_empty()
            && self.bad_col_types.is_empty()
    }

    pub fn summary(&self, spec: &InflationSpec) -> String {
        if self.is_valid() {
            return "valid".to_string();
        }
        let mut parts = Vec::new();
        if !self.bad_rows.is_empty() {
            let l: Vec<String> = self.bad_rows.iter().map(|&r| spec.party_label(r)).collect();
            parts.push(format!("row count violated at {}", l.join(",")));
        }
        if !self.bad_cols.is_empty() {
            let l: Vec<String> = self.bad_cols.iter().map(|&c| spec.resource_label(c)).collect();
            parts.push(format!("column count violated at {}", l.join(",")));
        }
        if !self.bad_row_types.is_empty() {
            parts.push(format!("{} row/type violations", self.bad_row_types.len()));
        }
        if !self.bad_col_types.is_empty() {
            parts.push(format!("{} column/type violations", self.bad_col_types.len()));
        }
        parts.join("; ")
    }
}

pub fn validate_inflation(spec: &InflationSpec) -> ValidityReport {
    let n = spec.n_types;
    let size = spec.size();
    let m = &spec.incidence;
    let mut report = ValidityReport::default();
    for r in 0..size {
        if m.row_sum(r) != n - 1 {
            report.bad_rows.push(r);
        }
        let mut per_type = vec![0usize; n];
        for c in 0..size {
            per_type[spec.type_of(c)] += m.get(r, c) as usize;
        }
        for (s, &count) in per_type.iter().enumerate() {
            let expected = usize::from(s != spec.type_of(r));
            if count != expected {
                report.bad_row_types.push((r, s));
            }
        }
    }
    for c in 0..size {
        if m.col_sum(c) != n - 1 {
            report.bad_cols.push(c);
        }
        let mut per_type = vec![0usize; n];
        for r in 0..size {
            per_type[spec.type_of(r)] += m.get(r, c) as usize;
        }
        for (s, &count) in per_type.iter().enumerate() {
            let expected = usize::from(s != spec.type_of(c));
            if count != expected {
                report.bad_col_types.push((c, s));
            }
        }
    }
    report
}

/// Isomorphism signature of a party pair: component `s` counts the type-`s`
/// resources held by exactly one of the two parties.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GammaVector(pub Vec<u8>);

impl GammaVector {
    pub fn components(&self) -> &[u8] {
        &self.0
    }
}

impl std::fmt::Display for GammaVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn gamma_vector(spec: &InflationSpec, mu: usize, nu: usize) -> Result<GammaVector> {
    spec.check_index(mu)?;
    spec.check_index(nu)?;
    if mu == nu {
        return Err(invalid("gamma vector needs two distinct parties"));
    }
    let mut comps = vec![0u8; spec.n_types];
    let (rm, rn) = (spec.incidence.row(mu), spec.incidence.row(nu));
    for t in 0..spec.size() {
        comps[spec.type_of(t)] += rm[t] ^ rn[t];
    }
    Ok(GammaVector(comps))
}

pub type PartyPair = (usize, usize);

fn check_pair(spec: &InflationSpec, (a, b): PartyPair) -> Result<()> {
    spec.check_index(a)?;
    spec.check_index(b)?;
    if a == b {
        return Err(invalid(format!("pair ({a},{b}) repeats a party")));
    }
    Ok(())
}

fn type_matched(spec: &InflationSpec, p: PartyPair, q: PartyPair) -> bool {
    spec.type_of(p.0) == spec.type_of(q.0) && spec.type_of(p.1) == spec.type_of(q.1)
}

/// Two type-matched pairs are isomorphic iff their gamma vectors agree.
pub fn are_isomorphic(spec: &InflationSpec, pair1: PartyPair, pair2: PartyPair) -> Result<bool> {
    check_pair(spec, pair1)?;
    check_pair(spec, pair2)?;
    if !type_matched(spec, pair1, pair2) {
        return Ok(false);
    }
    Ok(gamma_vector(spec, pair1.0, pair1.1)? == gamma_vector(spec, pair2.0, pair2.1)?)
}

/// Resource of a two-party subnetwork: its type and which of the two parties
/// hold it (bit 0: first party, bit 1: second party).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct IncidentResource {
    type_id: usize,
    holders: u8,
}

fn subnetwork(spec: &InflationSpec, (a, b): PartyPair) -> Vec<IncidentResource> {
    (0..spec.size())
        .filter_map(|t| {
            let holders = spec.incidence.get(a, t) | (spec.incidence.get(b, t) << 1);
            (holders != 0).then(|| IncidentResource { type_id: spec.type_of(t), holders })
        })
        .collect()
}

fn extend_matching(
    left: &[IncidentResource],
    right: &[IncidentResource],
    used: &mut [bool],
    i: usize,
) -> bool {
    if i == left.len() {
        return true;
    }
    for j in 0..right.len() {
        if !used[j] && right[j] == left[i] {
            used[j] = true;
            if extend_matching(left, right, used, i + 1) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

/// Ground-truth isomorphism check: searches for a relabelling of the
/// resources incident to `pair1` onto those of `pair2` that maps party to
/// party (first to first, second to second), preserves types once primes are
/// dropped, and preserves every party-resource link.
pub fn oracle_isomorphic(spec: &InflationSpec, pair1: PartyPair, pair2: PartyPair) -> Result<bool> {
    check_pair(spec, pair1)?;
    check_pair(spec, pair2)?;
    if !type_matched(spec, pair1, pair2) {
        return Ok(false);
    }
    let left = subnetwork(spec, pair1);
    let right = subnetwork(spec, pair2);
    if left.len() != right.len() {
        return Ok(false);
    }
    let mut used = vec![false; right.len()];
    Ok(extend_matching(&left, &right, &mut used, 0))
}

/// Partitions all ordered pairs of distinct parties into classes of
/// mutually isomorphic (type-matched, equal gamma) pairs. Classes appear in
/// order of their first member.
pub fn isomorphism_classes(spec: &InflationSpec) -> Vec<Vec<PartyPair>> {
    isomorphism_classes_within(spec, spec.size())
}

/// Same as [`isomorphism_classes`] but restricted to parties `0..limit`.
pub fn isomorphism_classes_within(spec: &InflationSpec, limit: usize) -> Vec<Vec<PartyPair>> {
    let limit = limit.min(spec.size());
    let mut index: HashMap<(usize, usize, GammaVector), usize> = HashMap::new();
    let mut classes: Vec<Vec<PartyPair>> = Vec::new();
    for a in 0..limit {
        for b in 0..limit {
            if a == b {
                continue;
            }
            let g = gamma_vector(spec, a, b).expect("indices in range");
            let key = (spec.type_of(a), spec.type_of(b), g);
            let slot = *index.entry(key).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[slot].push((a, b));
        }
    }
    classes
}
