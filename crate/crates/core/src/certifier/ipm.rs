//! Mehrotra predictor-corrector interior-point method for
//! `max c·x` subject to `A x = b`, `x >= 0`, on dense normal equations.
//!
//! Used for the larger inflation LPs where the simplex method needs too many
//! pivots. Both the primal point and the row multipliers are returned, with
//! the same sign conventions as [`super::simplex`].

use super::simplex::{DenseLp, SimplexResult, SimplexStatus};

#[derive(Clone, Debug)]
pub struct IpmOptions {
    /// Relative tolerance on primal and dual residuals and on the gap.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: 200 }
    }
}

const STEP_FRACTION: f64 = 0.995;

/// Sparse columns of `A`.
fn columns(lp: &DenseLp) -> Vec<Vec<(usize, f64)>> {
    let mut cols = vec![Vec::new(); lp.cols];
    for i in 0..lp.rows {
        for (j, col) in cols.iter_mut().enumerate() {
            let v = lp.a[i * lp.cols + j];
            if v != 0.0 {
                col.push((i, v));
            }
        }
    }
    cols
}

/// Lower-triangular Cholesky factor of `A diag(d) Aᵀ`, row-major. Pivots
/// that vanish (dependent rows) are replaced by a huge value, which pins
/// the matching component of the solution to zero.
struct Normal {
    m: usize,
    l: Vec<f64>,
}

impl Normal {
    fn factor(m: usize, cols: &[Vec<(usize, f64)>], d: &[f64]) -> Self {
        let mut l = vec![0.0; m * m];
        for (col, &dj) in cols.iter().zip(d) {
            for (a, &(ia, va)) in col.iter().enumerate() {
                let f = dj * va;
                let row = &mut l[ia * m..ia * m + m];
                for &(ib, vb) in &col[..=a] {
                    row[ib] += f * vb;
                }
            }
        }
        let max_diag = (0..m).map(|i| l[i * m + i]).fold(0.0f64, f64::max).max(1e-300);
        for j in 0..m {
            let (upper, lower) = l.split_at_mut((j + 1) * m);
            let rowj = &mut upper[j * m..];
            let djj = rowj[j] - dot(&rowj[..j], &rowj[..j]);
            if djj <= 1e-14 * max_diag {
                rowj[j] = 1e64;
                lower.chunks_mut(m).for_each(|rowi| rowi[j] = 0.0);
                continue;
            }
            let ljj = djj.sqrt();
            rowj[j] = ljj;
            let rowj = &rowj[..j];
            for rowi in lower.chunks_mut(m) {
                rowi[j] = (rowi[j] - dot(&rowi[..j], rowj)) / ljj;
            }
        }
        Self { m, l }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let m = self.m;
        for i in 0..m {
            let mut v = rhs[i];
            for k in 0..i {
                v -= self.l[i * m + k] * rhs[k];
            }
            rhs[i] = v / self.l[i * m + i];
        }
        for i in (0..m).rev() {
            let mut v = rhs[i];
            for k in i + 1..m {
                v -= self.l[k * m + i] * rhs[k];
            }
            rhs[i] = v / self.l[i * m + i];
        }
    }
}

fn mat_vec(m: usize, cols: &[Vec<(usize, f64)>], x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for (col, &xj) in cols.iter().zip(x) {
        if xj != 0.0 {
            for &(i, v) in col {
                out[i] += v * xj;
            }
        }
    }
    out
}

fn mat_t_vec(cols: &[Vec<(usize, f64)>], y: &[f64]) -> Vec<f64> {
    cols.iter().map(|col| col.iter().map(|&(i, v)| v * y[i]).sum()).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest step in `[0, 1]` keeping `v + t dv >= 0`.
fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter().zip(dv).filter(|(_, &d)| d < 0.0).fold(1.0f64, |t, (&x, &d)| t.min(-x / d))
}

/// Newton direction for the residuals `rb = Ax - b`, `rc = Aᵀy + s - c` and
/// complementarity target `r3` (`S dx + X ds = r3`).
fn direction(
    cols: &[Vec<(usize, f64)>],
    chol: &Normal,
    x: &[f64],
    s: &[f64],
    rb: &[f64],
    rc: &[f64],
    r3: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = x.len();
    // M dy = -rb - A S^-1 r3 - A D rc
    let t: Vec<f64> = (0..n).map(|j| r3[j] / s[j] + x[j] / s[j] * rc[j]).collect();
    let at = mat_vec(chol.m, cols, &t);
    let mut dy: Vec<f64> = rb.iter().zip(&at).map(|(r, a)| -r - a).collect();
    chol.solve(&mut dy);
    let aty = mat_t_vec(cols, &dy);
    let ds: Vec<f64> = (0..n).map(|j| -rc[j] - aty[j]).collect();
    let dx: Vec<f64> = (0..n).map(|j| (r3[j] - x[j] * ds[j]) / s[j]).collect();
    (dx, dy, ds)
}

/// Solves `lp`. `pivots` in the result counts interior-point iterations.
pub fn solve(lp: &DenseLp, opts: &IpmOptions) -> SimplexResult {
    let (m, n) = (lp.rows, lp.cols);
    let cols = columns(lp);
    // internally: min c'x with c' = -c
    let c: Vec<f64> = lp.c.iter().map(|v| -v).collect();
    let b = &lp.b;

    let ones = vec![1.0; n];
    let chol = Normal::factor(m, &cols, &ones);
    let mut w = b.clone();
    chol.solve(&mut w);
    let mut x = mat_t_vec(&cols, &w);
    let mut y = mat_vec(m, &cols, &c);
    chol.solve(&mut y);
    let aty = mat_t_vec(&cols, &y);
    let mut s: Vec<f64> = c.iter().zip(&aty).map(|(c, a)| c - a).collect();
    let dx0 = (-1.5 * x.iter().copied().fold(f64::INFINITY, f64::min)).max(0.0);
    let ds0 = (-1.5 * s.iter().copied().fold(f64::INFINITY, f64::min)).max(0.0);
    x.iter_mut().for_each(|v| *v += dx0);
    s.iter_mut().for_each(|v| *v += ds0);
    let xs = dot(&x, &s);
    let (sx, ss) = (x.iter().sum::<f64>(), s.iter().sum::<f64>());
    let (hx, hs) = (0.5 * xs / ss.max(1e-300), 0.5 * xs / sx.max(1e-300));
    x.iter_mut().for_each(|v| *v += hx.max(1e-8));
    s.iter_mut().for_each(|v| *v += hs.max(1e-8));

    let (bnorm, cnorm) = (1.0 + norm(b), 1.0 + norm(&c));
    let mut iter = 0;
    loop {
        let ax = mat_vec(m, &cols, &x);
        let rb: Vec<f64> = ax.iter().zip(b).map(|(a, b)| a - b).collect();
        let aty = mat_t_vec(&cols, &y);
        let rc: Vec<f64> = (0..n).map(|j| aty[j] + s[j] - c[j]).collect();
        let (pobj, dobj) = (dot(&c, &x), dot(b, &y));
        let mu = dot(&x, &s) / n as f64;
        let converged = norm(&rb) / bnorm < opts.tol
            && norm(&rc) / cnorm < opts.tol
            && (pobj - dobj).abs() / (1.0 + pobj.abs()) < opts.tol;
        if converged {
            break;
        }
        if iter >= opts.max_iter || !mu.is_finite() {
            return SimplexResult {
                status: SimplexStatus::IterationLimit,
                objective: f64::NAN,
                x: vec![],
                duals: vec![],
                pivots: iter,
            };
        }
        iter += 1;
        let d: Vec<f64> = x.iter().zip(&s).map(|(x, s)| x / s).collect();
        let chol = Normal::factor(m, &cols, &d);
        let r3: Vec<f64> = x.iter().zip(&s).map(|(x, s)| -x * s).collect();
        let (dxa, _, dsa) = direction(&cols, &chol, &x, &s, &rb, &rc, &r3);
        let (ap, ad) = (max_step(&x, &dxa), max_step(&s, &dsa));
        let mu_aff = (0..n).map(|j| (x[j] + ap * dxa[j]) * (s[j] + ad * dsa[j])).sum::<f64>() / n as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);
        let r3: Vec<f64> = (0..n).map(|j| -x[j] * s[j] - dxa[j] * dsa[j] + sigma * mu).collect();
        let (dx, dy, ds) = direction(&cols, &chol, &x, &s, &rb, &rc, &r3);
        let ap = (STEP_FRACTION * max_step(&x, &dx)).min(1.0);
        let ad = (STEP_FRACTION * max_step(&s, &ds)).min(1.0);
        for j in 0..n {
            x[j] += ap * dx[j];
            s[j] += ad * ds[j];
        }
        for (yi, d) in y.iter_mut().zip(&dy) {
            *yi += ad * d;
        }
    }
    // back to max form: multipliers of the maximization are -y
    SimplexResult {
        status: SimplexStatus::Optimal,
        objective: dot(&lp.c, &x),
        x,
        duals: y.iter().map(|v| -v).collect(),
        pivots: iter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::simplex;

    fn lp(rows: usize, cols: usize, a: &[f64], b: &[f64], c: &[f64]) -> DenseLp {
        DenseLp { rows, cols, a: a.to_vec(), b: b.to_vec(), c: c.to_vec() }
    }

    #[test]
    fn matches_simplex_on_small_problem() {
        // max 3x + 2y, x + y + s1 = 4, x + 3y + s2 = 6
        let p = lp(2, 4, &[1.0, 1.0, 1.0, 0.0, 1.0, 3.0, 0.0, 1.0], &[4.0, 6.0], &[3.0, 2.0, 0.0, 0.0]);
        let r = solve(&p, &IpmOptions::default());
        let s = simplex::solve(&p, &simplex::SimplexOptions::default());
        assert_eq!(r.status, SimplexStatus::Optimal);
        assert!((r.objective - 12.0).abs() < 1e-8, "{}", r.objective);
        for (a, b) in r.duals.iter().zip(&s.duals) {
            assert!((a - b).abs() < 1e-7, "{:?} vs {:?}", r.duals, s.duals);
        }
    }

    #[test]
    fn tolerates_redundant_rows() {
        let p = lp(3, 3, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0, 0.0], &[1.0, 2.0, 0.25], &[0.0, 1.0, 2.0]);
        let r = solve(&p, &IpmOptions::default());
        assert_eq!(r.status, SimplexStatus::Optimal);
        assert!((r.objective - 1.5).abs() < 1e-8, "{}", r.objective);
    }
}
