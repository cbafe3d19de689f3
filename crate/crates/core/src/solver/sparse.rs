use crate::error::SolverError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Compressed-row square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Builds from per-row `(column, value)` lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in r {
                if last == Some(c) {
                    *val.last_mut().unwrap() += v;
                } else {
                    col.push(c);
                    val.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(col.len());
        }
        Self { n, row_ptr, col, val }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col[k], self.val[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().with_min_len(512).for_each(|(i, yi)| {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        });
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol * v.abs().max(1.0)))
    }

    /// `max |i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n).flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j))).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub rtol: f64,
    /// `None` uses `50 sqrt(n)`.
    pub max_iter: Option<usize>,
    /// Fall back to banded elimination when CG meets negative curvature.
    /// When false such operators are reported as non-convergent.
    pub allow_indefinite: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, max_iter: None, allow_indefinite: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SolveMethod {
    Cg,
    BandedLu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub method: SolveMethod,
    pub iterations: usize,
    /// `||b - A x||_inf / ||b||_inf`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter().with_min_len(4096).zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn residual_inf(a: &Csr, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r = ax.iter().zip(b).map(|(p, q)| (q - p).abs()).fold(0.0, f64::max);
    let nb = inf_norm(b);
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}

enum CgOutcome {
    Converged(Vec<f64>, usize),
    Indefinite(usize, f64),
    Stalled(usize, f64),
}

/// Jacobi-preconditioned conjugate gradients; stops on the relative
/// infinity-norm residual.
fn pcg(a: &Csr, b: &[f64], rtol: f64, max_iter: usize) -> CgOutcome {
    let n = a.n;
    let nb = inf_norm(b);
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return CgOutcome::Converged(x, 0);
    }
    let dinv: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    if a.diagonal().iter().any(|&d| d <= 0.0) {
        return CgOutcome::Indefinite(0, 1.0);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return CgOutcome::Indefinite(it, inf_norm(&r) / nb);
        }
        let alpha = rz / pap;
        x.par_iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.par_iter_mut().zip(&ap).for_each(|(r, q)| *r -= alpha * q);
        if inf_norm(&r) <= rtol * nb {
            // Guard against drift in the recursive residual.
            if residual_inf(a, &x, b) <= rtol {
                return CgOutcome::Converged(x, it);
            }
            r = b.iter().zip(a.matvec(&x)).map(|(b, ax)| b - ax).collect();
        }
        z.par_iter_mut().zip(&r).zip(&dinv).for_each(|((z, r), d)| *z = r * d);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
    }
    CgOutcome::Stalled(max_iter, residual_inf(a, &x, b))
}

/// Solves `a x = b` for a symmetric `a`.
pub fn solve(a: &Csr, b: &[f64], opts: &SolveOptions) -> Result<(Vec<f64>, SolveStats), SolverError> {
    let cap = opts.max_iter.unwrap_or_else(|| ((50.0 * (a.n as f64).sqrt()).ceil() as usize).max(50));
    match pcg(a, b, opts.rtol, cap) {
        CgOutcome::Converged(x, iterations) => {
            let residual = residual_inf(a, &x, b);
            Ok((x, SolveStats { method: SolveMethod::Cg, iterations, residual }))
        }
        CgOutcome::Indefinite(iterations, residual) => {
            if !opts.allow_indefinite {
                return Err(SolverError::NonConvergence { iterations, residual, indefinite: true });
            }
            let x = banded_lu_solve(a, b)?;
            let residual = residual_inf(a, &x, b);
            Ok((x, SolveStats { method: SolveMethod::BandedLu, iterations: 0, residual }))
        }
        CgOutcome::Stalled(iterations, residual) => {
            Err(SolverError::NonConvergence { iterations, residual, indefinite: false })
        }
    }
}

/// Gaussian elimination with partial pivoting in band storage.
pub fn banded_lu_solve(a: &Csr, b: &[f64]) -> Result<Vec<f64>, SolverError> {
    let n = a.n;
    let kl = a.bandwidth();
    let ku = kl;
    // Row pivoting can push fill up to kl + ku above the diagonal.
    let width = kl + ku + kl + 1;
    let off = kl; // column j of row i lives at (j + off - i)
    let mut band = vec![0.0; n * width];
    let at = |i: usize, j: usize| i * width + (j + off - i);
    for i in 0..n {
        for (j, v) in a.row(i) {
            band[at(i, j)] = v;
        }
    }
    let mut rhs = b.to_vec();
    for k in 0..n {
        let last = (k + kl).min(n - 1);
        let (mut piv, mut best) = (k, band[at(k, k)].abs());
        for i in k + 1..=last {
            let v = band[at(i, k)].abs();
            if v > best {
                piv = i;
                best = v;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(SolverError::NonConvergence { iterations: k, residual: f64::INFINITY, indefinite: true });
        }
        let jmax = (k + kl + ku).min(n - 1);
        if piv != k {
            for j in k..=jmax {
                band.swap(at(k, j), at(piv, j));
            }
            rhs.swap(k, piv);
        }
        let d = band[at(k, k)];
        for i in k + 1..=last {
            let m = band[at(i, k)] / d;
            if m == 0.0 {
                continue;
            }
            band[at(i, k)] = 0.0;
            for j in k + 1..=jmax {
                band[at(i, j)] -= m * band[at(k, j)];
            }
            rhs[i] -= m * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let jmax = (i + kl + ku).min(n - 1);
        let s: f64 = (i + 1..=jmax).map(|j| band[at(i, j)] * x[j]).sum();
        x[i] = (rhs[i] - s) / band[at(i, i)];
    }
    Ok(x)
}
