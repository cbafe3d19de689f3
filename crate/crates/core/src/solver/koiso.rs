use super::Axis;
use crate::error::SolverError;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Patch `[x_lo, x_hi] x [y_lo, y_hi]` of the upper half space `h = dx^2/x^2`
/// in dimension `n`. Tensors depend on `(x, y)` only; the remaining `n - 2`
/// coordinates are flat directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KoisoPatch {
    pub n: usize,
    pub x: Axis,
    pub y: Axis,
}

impl KoisoPatch {
    pub fn new(n: usize, nodes: usize) -> Self {
        Self { n, x: Axis::new(0.4, 2.0, nodes), y: Axis::new(-0.8, 0.8, nodes) }
    }

    pub fn len(&self) -> usize {
        self.x.nodes * self.y.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample(&self, u: &TraceFreeBumps) -> Vec<DMatrix<f64>> {
        (0..self.y.nodes)
            .flat_map(|j| (0..self.x.nodes).map(move |i| (i, j)))
            .map(|(i, j)| u.at(self.x.at(i), self.y.at(j)))
            .collect()
    }
}

/// Sum of `x^-2 A_m phi_m(x, y)` with `A_m` constant, symmetric and
/// trace-free and `phi_m = (1 - d^2/R^2)^6` polynomial bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFreeBumps {
    pub n: usize,
    pub radius: f64,
    pub centers: Vec<(f64, f64)>,
    pub amplitudes: Vec<Vec<f64>>,
}

impl TraceFreeBumps {
    pub fn zero(n: usize) -> Self {
        Self { n, radius: 0.4, centers: Vec::new(), amplitudes: Vec::new() }
    }

    pub fn at(&self, x: f64, y: f64) -> DMatrix<f64> {
        let n = self.n;
        let mut out = DMatrix::zeros(n, n);
        for (&(cx, cy), amp) in self.centers.iter().zip(&self.amplitudes) {
            let d2 = ((x - cx).powi(2) + (y - cy).powi(2)) / (self.radius * self.radius);
            if d2 < 1.0 {
                let phi = (1.0 - d2).powi(6) / (x * x);
                out += DMatrix::from_row_slice(n, n, amp) * phi;
            }
        }
        out
    }
}

/// Two seeded bumps centred in `[1.1, 1.3] x [-0.05, 0.05]`.
pub fn random_trace_free_bumps(n: usize, seed: u64) -> TraceFreeBumps {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = TraceFreeBumps::zero(n);
    for _ in 0..2 {
        out.centers.push((rng.random_range(1.1..1.3), rng.random_range(-0.05..0.05)));
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let tr = a.trace() / n as f64;
        for i in 0..n {
            a[(i, i)] -= tr;
        }
        out.amplitudes.push(a.transpose().as_slice().to_vec());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KoisoReport {
    pub nodes: usize,
    pub spacing: f64,
    /// `||nabla u||^2`.
    pub lhs: f64,
    /// `1/2 ||T||^2 + ||div u||^2 - ||tr u||^2 + n ||u||^2`.
    pub rhs: f64,
    pub gap: f64,
    /// `(u, nabla* nabla u + K u)`.
    pub pairing: f64,
    pub norm_sq: f64,
    /// `pairing - (n + K) ||u||^2`.
    pub slack: f64,
    pub k: f64,
}

/// `Gamma^m_ab` of `dx^2/x^2` with `x` the first coordinate.
fn gamma(m: usize, a: usize, b: usize, x: f64) -> f64 {
    let d = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
    -(d(m, a) * d(b, 0) + d(m, b) * d(a, 0) - d(a, b) * d(m, 0)) / x
}

/// Rank-3 array per node, `[(a, i, j)]` flattened as `(a * n + i) * n + j`.
type Rank3 = Vec<f64>;

/// Covariant derivative of a per-node rank-`r` tensor on the patch by central
/// differences in `(x, y)`; nodes within one cell of the border get zero.
fn cov_deriv(p: &KoisoPatch, vals: &[Vec<f64>], rank: usize) -> Vec<Rank3> {
    let n = p.n;
    let (nx, ny) = (p.x.nodes, p.y.nodes);
    let size = n.pow(rank as u32);
    let mut out = vec![vec![0.0; n * size]; nx * ny];
    let idx = |ii: &[usize]| ii.iter().fold(0, |acc, &v| acc * n + v);
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let node = j * nx + i;
            let x = p.x.at(i);
            let t = &vals[node];
            let dx: Vec<f64> = (0..size).map(|c| (vals[node + 1][c] - vals[node - 1][c]) / (2.0 * p.x.spacing)).collect();
            let dy: Vec<f64> =
                (0..size).map(|c| (vals[node + nx][c] - vals[node - nx][c]) / (2.0 * p.y.spacing)).collect();
            let o = &mut out[node];
            let mut multi = vec![0usize; rank];
            for a in 0..n {
                for c in 0..size {
                    let mut rem = c;
                    for s in (0..rank).rev() {
                        multi[s] = rem % n;
                        rem /= n;
                    }
                    let mut v = match a {
                        0 => dx[c],
                        1 => dy[c],
                        _ => 0.0,
                    };
                    for s in 0..rank {
                        let mut mm = multi.clone();
                        for m in 0..n {
                            let g = gamma(m, a, multi[s], x);
                            if g != 0.0 {
                                mm[s] = m;
                                v -= g * t[idx(&mm)];
                            }
                        }
                    }
                    o[a * size + c] = v;
                }
            }
        }
    }
    out
}

/// Trapezoid quadrature of every term of the integration-by-parts identity
/// for `u`, with volume density `x^-n`.
pub fn koiso_quadrature(p: &KoisoPatch, u: &[DMatrix<f64>], k: f64) -> Result<KoisoReport, SolverError> {
    let n = p.n;
    let (nx, ny) = (p.x.nodes, p.y.nodes);
    if nx < super::MIN_NODES || ny < super::MIN_NODES {
        return Err(SolverError::GridTooCoarse(format!("{nx} x {ny} nodes")));
    }
    if u.len() != nx * ny || u.iter().any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(SolverError::InvalidGrid("one n x n tensor per node expected".into()));
    }
    const MARGIN: usize = 3;
    for j in 0..ny {
        for i in 0..nx {
            let inside = i >= MARGIN && i + MARGIN < nx && j >= MARGIN && j + MARGIN < ny;
            if !inside && u[j * nx + i].iter().any(|v| *v != 0.0) {
                return Err(SolverError::SupportViolation(i, j));
            }
        }
    }
    let flat: Vec<Vec<f64>> = u.iter().map(|m| m.transpose().as_slice().to_vec()).collect();
    let c = cov_deriv(p, &flat, 2);
    let dc = cov_deriv(p, &c, 3);
    let nn = n * n;
    let (mut lhs, mut t_sq, mut div_sq, mut tr_sq, mut u_sq, mut rough) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for j in 0..ny {
        for i in 0..nx {
            let node = j * nx + i;
            let x = p.x.at(i);
            let wx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
            let wy = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
            let dv = wx * wy * p.x.spacing * p.y.spacing * x.powi(-(n as i32));
            let (x2, x4, x6) = (x * x, x.powi(4), x.powi(6));
            let uu = &flat[node];
            let cc = &c[node];
            let at3 = |a: usize, b: usize, e: usize| cc[a * nn + b * n + e];
            let mut grad = 0.0;
            let mut t = 0.0;
            let mut div = vec![0.0; n];
            for a in 0..n {
                for b in 0..n {
                    for e in 0..n {
                        let v = at3(a, b, e);
                        grad += v * v;
                        let tv = at3(e, a, b) - at3(a, b, e);
                        t += tv * tv;
                    }
                    div[b] += at3(a, a, b);
                }
            }
            let trace: f64 = (0..n).map(|a| uu[a * n + a]).sum();
            let usq: f64 = uu.iter().map(|v| v * v).sum();
            let lap: f64 = (0..nn).map(|ij| -(0..n).map(|a| dc[node][a * n * nn + a * nn + ij]).sum::<f64>() * uu[ij]).sum();
            lhs += x6 * grad * dv;
            t_sq += x6 * t * dv;
            div_sq += x2 * x4 * div.iter().map(|d| d * d).sum::<f64>() * dv;
            tr_sq += x2 * trace * x2 * trace * dv;
            u_sq += x4 * usq * dv;
            rough += x2 * x4 * lap * dv;
        }
    }
    let nf = n as f64;
    let rhs = 0.5 * t_sq + div_sq - tr_sq + nf * u_sq;
    let pairing = rough + k * u_sq;
    Ok(KoisoReport {
        nodes: nx,
        spacing: p.x.spacing,
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        pairing,
        norm_sq: u_sq,
        slack: pairing - (nf + k) * u_sq,
        k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KoisoRefinement {
    pub seed: u64,
    pub reports: Vec<KoisoReport>,
    /// Least-squares slope of `log gap` against `log spacing`.
    pub order: f64,
}

pub fn koiso_refinement(n: usize, seed: u64, node_counts: &[usize], k: f64) -> Result<KoisoRefinement, SolverError> {
    let bumps = random_trace_free_bumps(n, seed);
    let reports = node_counts
        .iter()
        .map(|&m| {
            let patch = KoisoPatch::new(n, m);
            koiso_quadrature(&patch, &patch.sample(&bumps), k)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.spacing.ln(), r.gap.max(f64::MIN_POSITIVE).ln())).collect();
    Ok(KoisoRefinement { seed, reports, order: slope(&pts) })
}

pub(crate) fn slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    num / den
}
