//! Dense revised simplex for `max c·x` subject to `A x = b`, `x >= 0`.
//!
//! The basis inverse is held explicitly and rebuilt from the original
//! columns by Gauss-Jordan elimination at regular intervals, which keeps
//! round-off from accumulating over long degenerate runs. Phase 1 starts
//! from an all-artificial basis. Pricing uses devex reference weights; after
//! a run of degenerate pivots the solver switches to Bland's rule until the
//! objective moves again.

use serde::Serialize;

#[derive(Clone, Debug)]
pub struct DenseLp {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols` constraint matrix.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub tol: f64,
    pub max_pivots: usize,
    /// Consecutive degenerate pivots before falling back to Bland's rule.
    pub degenerate_switch: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_pivots: 1_000_000, degenerate_switch: 50 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub status: SimplexStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    /// Row multipliers `π` with `Aᵀπ >= c` and `b·π = objective` at optimum.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

/// Smallest entry accepted as a pivot outside Bland mode.
const PIVOT_TOL: f64 = 1e-7;
/// Entries of `B^-1 a` below this magnitude are treated as zero.
const ZERO_TOL: f64 = 1e-11;
const PERTURBATION: f64 = 1e-7;

struct Columns {
    /// Sparse columns of the row-sign-adjusted constraint matrix.
    cols: Vec<Vec<(usize, f64)>>,
    norms: Vec<f64>,
}

struct Revised<'a> {
    m: usize,
    n: usize,
    cols: &'a Columns,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Row-major `m x m` basis inverse.
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots: usize,
    since_reinvert: usize,
}

impl<'a> Revised<'a> {
    /// Column `j`; indices `>= n` are artificial unit columns.
    fn column(&self, j: usize) -> std::borrow::Cow<'a, [(usize, f64)]> {
        if j < self.n {
            std::borrow::Cow::Borrowed(&self.cols.cols[j])
        } else {
            std::borrow::Cow::Owned(vec![(j - self.n, 1.0)])
        }
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(k, v) in self.column(j).iter() {
            for (i, a) in alpha.iter_mut().enumerate() {
                *a += self.binv[i * m + k] * v;
            }
        }
        for a in &mut alpha {
            if a.abs() < ZERO_TOL {
                *a = 0.0;
            }
        }
        alpha
    }

    /// Multipliers `y = c_B B^-1`.
    fn prices(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = cost(bj);
            if cb != 0.0 {
                for (yk, bk) in y.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                    *yk += cb * bk;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], cost: &dyn Fn(usize) -> f64) -> f64 {
        cost(j) - self.column(j).iter().map(|&(k, v)| y[k] * v).sum::<f64>()
    }

    /// Rebuilds `B^-1` and `x_B` from the original data. Returns false if the
    /// basis matrix is numerically singular (the old inverse is kept).
    fn reinvert(&mut self) -> bool {
        let m = self.m;
        let w = 2 * m;
        let mut aug = vec![0.0; m * w];
        for (c, &j) in self.basis.iter().enumerate() {
            for &(k, v) in self.column(j).iter() {
                aug[k * w + c] = v;
            }
        }
        for i in 0..m {
            aug[i * w + m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m).max_by(|&a, &b| aug[a * w + c].abs().total_cmp(&aug[b * w + c].abs())).expect("nonempty");
            if aug[p * w + c].abs() < 1e-12 {
                return false;
            }
            if p != c {
                for k in 0..w {
                    aug.swap(c * w + k, p * w + k);
                }
            }
            let inv = 1.0 / aug[c * w + c];
            for k in c..w {
                aug[c * w + k] *= inv;
            }
            let (head, tail) = aug.split_at_mut(c * w);
            let (prow, tail) = tail.split_at_mut(w);
            for row in head.chunks_mut(w).chain(tail.chunks_mut(w)) {
                let f = row[c];
                if f != 0.0 {
                    for k in c..w {
                        row[k] -= f * prow[k];
                    }
                }
            }
        }
        // row i of the reduced block is row i of B^-1 (basis position i)
        for i in 0..m {
            self.binv[i * m..(i + 1) * m].copy_from_slice(&aug[i * w + m..(i + 1) * w]);
        }
        for i in 0..m {
            self.xb[i] = (0..m).map(|k| self.binv[i * m + k] * self.rhs[k]).sum();
        }
        self.since_reinvert = 0;
        true
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let theta = self.xb[r] / alpha[r];
        for (x, a) in self.xb.iter_mut().zip(alpha) {
            *x -= theta * a;
        }
        self.xb[r] = theta;
        let inv = 1.0 / alpha[r];
        let (head, rest) = self.binv.split_at_mut(r * m);
        let (prow, tail) = rest.split_at_mut(m);
        prow.iter_mut().for_each(|v| *v *= inv);
        let rows = head.chunks_mut(m).enumerate().chain(tail.chunks_mut(m).enumerate().map(|(i, row)| (i + r + 1, row)));
        for (i, row) in rows {
            let f = alpha[i];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }
        self.basis[r] = q;
        self.pivots += 1;
        self.since_reinvert += 1;
        if self.since_reinvert >= m.max(64) {
            self.reinvert();
        }
    }

    /// Devex update from pivot row `r` of `B^-1 A` before `q` enters.
    fn update_weights(&self, weights: &mut [f64], in_basis: &[bool], r: usize, q: usize, pivot: f64) {
        let m = self.m;
        let rho = &self.binv[r * m..(r + 1) * m];
        let wq = weights[q];
        for (j, w) in weights.iter_mut().enumerate().take(in_basis.len()) {
            if in_basis[j] || j == q {
                continue;
            }
            let arj: f64 = self.column(j).iter().map(|&(k, v)| rho[k] * v).sum();
            if arj != 0.0 {
                let ratio = arj / pivot;
                *w = w.max(ratio * ratio * wq);
            }
        }
        let leaving = self.basis[r];
        weights[leaving] = (wq / (pivot * pivot)).max(1.0);
        if weights[leaving] > 1e8 || wq > 1e8 {
            weights.iter_mut().enumerate().for_each(|(j, w)| *w = if j < self.n { self.cols.norms[j].powi(2) } else { 1.0 });
        }
    }

    /// Simplex iterations with entering candidates `< allowed`.
    fn iterate(&mut self, allowed: usize, cost: &dyn Fn(usize) -> f64, opts: &SimplexOptions) -> SimplexStatus {
        let n = self.n;
        let mut stalled = 0usize;
        let mut in_basis = vec![false; allowed];
        // devex reference weights, one per variable including artificials
        // start from the exact steepest-edge weights of the slack basis
        let mut weights: Vec<f64> = (0..self.n + self.m).map(|j| if j < self.n { self.cols.norms[j].powi(2) } else { 1.0 }).collect();
        loop {
            if self.pivots >= opts.max_pivots {
                return SimplexStatus::IterationLimit;
            }
            let y = self.prices(cost);
            let bland = stalled >= opts.degenerate_switch;
            in_basis.iter_mut().for_each(|b| *b = false);
            for &j in &self.basis {
                if j < allowed {
                    in_basis[j] = true;
                }
            }
            let mut enter = None;
            let mut best = 0.0;
            for j in (0..allowed).filter(|&j| !in_basis[j]) {
                let d = self.reduced_cost(j, &y, cost);
                if d > opts.tol {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    let score = d * d / weights[j];
                    if score > best {
                        enter = Some(j);
                        best = score;
                    }
                }
            }
            let Some(q) = enter else { return SimplexStatus::Optimal };
            let alpha = self.ftran(q);
            // artificial basics sitting at zero leave first
            let stuck = (0..self.m)
                .find(|&i| self.basis[i] >= n && alpha[i].abs() > PIVOT_TOL && self.xb[i].abs() <= opts.tol);
            let r = match stuck {
                Some(i) => {
                    self.xb[i] = 0.0;
                    i
                }
                None => {
                    // two-pass ratio test: bound the step over every positive
                    // entry with a small slack, then take the largest pivot
                    let mut bound = f64::INFINITY;
                    for (i, &a) in alpha.iter().enumerate() {
                        if a > 0.0 {
                            bound = bound.min((self.xb[i].max(0.0) + opts.tol) / a);
                        }
                    }
                    if bound == f64::INFINITY {
                        return SimplexStatus::Unbounded;
                    }
                    let mut leave: Option<usize> = None;
                    for (i, &a) in alpha.iter().enumerate() {
                        if a > 0.0 && self.xb[i].max(0.0) / a <= bound {
                            let better = match leave {
                                None => true,
                                Some(r) if bland => {
                                    let (ri, rr) = (self.xb[i].max(0.0) / a, self.xb[r].max(0.0) / alpha[r]);
                                    ri < rr - 1e-12 || (ri <= rr + 1e-12 && self.basis[i] < self.basis[r])
                                }
                                Some(r) => a > alpha[r],
                            };
                            if better {
                                leave = Some(i);
                            }
                        }
                    }
                    let r = leave.expect("bound came from a candidate row");
                    if alpha[r] < PIVOT_TOL && !bland {
                        stalled = opts.degenerate_switch;
                        continue;
                    }
                    if self.xb[r] < 0.0 {
                        self.xb[r] = 0.0;
                    }
                    r
                }
            };
            if self.xb[r] / alpha[r] <= 1e-12 {
                stalled += 1;
            } else {
                stalled = 0;
            }
            if !bland {
                self.update_weights(&mut weights, &in_basis, r, q, alpha[r]);
            }
            self.pivot(r, q, &alpha);
        }
    }
}

fn fail(status: SimplexStatus, pivots: usize) -> SimplexResult {
    SimplexResult { status, objective: f64::NAN, x: vec![], duals: vec![], pivots }
}

/// Solves `lp`. The right-hand side is first perturbed by tiny distinct
/// amounts, which removes most degeneracy; the final basis is then
/// re-evaluated against the exact right-hand side. If that basis is not
/// feasible for the exact data the problem is re-solved unperturbed.
pub fn solve(lp: &DenseLp, opts: &SimplexOptions) -> SimplexResult {
    assert_eq!(lp.a.len(), lp.rows * lp.cols, "constraint matrix size");
    assert_eq!(lp.b.len(), lp.rows, "rhs size");
    assert_eq!(lp.c.len(), lp.cols, "cost size");
    let perturbed: Vec<f64> = lp
        .b
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            // deterministic spread in [1, 2) so no two rows get the same shift
            let u = 1.0 + ((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64;
            b + PERTURBATION * u * (1.0 + b.abs())
        })
        .collect();
    let first = run(lp, &perturbed, Some(&lp.b), opts);
    if first.status == SimplexStatus::Optimal {
        return first;
    }
    let mut second = run(lp, &lp.b, None, opts);
    second.pivots += first.pivots;
    second
}

/// One two-phase solve with right-hand side `rhs`. With `exact` given, the
/// final basis must also be feasible for `exact` and the reported point is
/// the exact basic solution; otherwise the run reports `IterationLimit` so
/// that the caller falls back.
fn run(lp: &DenseLp, rhs: &[f64], exact: Option<&[f64]>, opts: &SimplexOptions) -> SimplexResult {
    let (m, n) = (lp.rows, lp.cols);
    let sign: Vec<f64> = rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut cols = vec![Vec::new(); n];
    for i in 0..m {
        for j in 0..n {
            let v = lp.a[i * n + j];
            if v != 0.0 {
                cols[j].push((i, sign[i] * v));
            }
        }
    }
    let norms = cols.iter().map(|c: &Vec<(usize, f64)>| (1.0 + c.iter().map(|(_, v)| v * v).sum::<f64>()).sqrt()).collect();
    let columns = Columns { cols, norms };
    let srhs: Vec<f64> = rhs.iter().zip(&sign).map(|(b, s)| b * s).collect();
    let mut binv = vec![0.0; m * m];
    for i in 0..m {
        binv[i * m + i] = 1.0;
    }
    let mut rev = Revised {
        m,
        n,
        cols: &columns,
        rhs: srhs.clone(),
        basis: (n..n + m).collect(),
        binv,
        xb: srhs,
        pivots: 0,
        since_reinvert: 0,
    };
    let phase1 = |j: usize| if j >= n { -1.0 } else { 0.0 };
    let status = rev.iterate(n, &phase1, opts);
    if status == SimplexStatus::IterationLimit {
        return fail(status, rev.pivots);
    }
    rev.reinvert();
    let scale = 1.0 + rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let infeasibility: f64 = rev.basis.iter().zip(&rev.xb).filter(|(&j, _)| j >= n).map(|(_, x)| x.abs()).sum();
    if infeasibility > 1e-7 * scale {
        return fail(SimplexStatus::Infeasible, rev.pivots);
    }
    let cost = |j: usize| if j < n { lp.c[j] } else { 0.0 };
    let status = rev.iterate(n, &cost, opts);
    if status != SimplexStatus::Optimal {
        return fail(status, rev.pivots);
    }
    rev.reinvert();
    let final_rhs: Vec<f64> = match exact {
        Some(b) => b.iter().zip(&sign).map(|(b, s)| b * s).collect(),
        None => rev.rhs.clone(),
    };
    let escale = 1.0 + final_rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut x = vec![0.0; n];
    for i in 0..m {
        let v: f64 = (0..m).map(|k| rev.binv[i * m + k] * final_rhs[k]).sum();
        let j = rev.basis[i];
        let bad = if j >= n { v.abs() > 1e-9 * escale } else { v < -1e-9 * escale };
        if bad {
            return fail(SimplexStatus::IterationLimit, rev.pivots);
        }
        if j < n {
            x[j] = v.max(0.0);
        }
    }
    let y = rev.prices(&cost);
    let duals = y.iter().zip(&sign).map(|(y, s)| y * s).collect();
    let objective = x.iter().zip(&lp.c).map(|(x, c)| x * c).sum();
    SimplexResult { status: SimplexStatus::Optimal, objective, x, duals, pivots: rev.pivots }
}
