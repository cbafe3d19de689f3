//! Reduced Dirichlet problems for `Delta + K` on exhaustion grids, the
//! integral identity for trace-free tensors and the rescaling scans.

mod grid;
mod koiso;
mod schauder;
mod sparse;
mod sweep;

pub use grid::{Axis, Grid2D, GridBox, MIN_NODES};
pub use koiso::{
    koiso_quadrature, koiso_refinement, random_trace_free_bumps, KoisoPatch, KoisoRefinement, KoisoReport,
    TraceFreeBumps,
};
pub use schauder::{case_for, schauder_coefficient_scan, schauder_uniformity, CaseFamily, SchauderRow, SchauderUniformity};
pub use sparse::{banded_lu_solve, solve, Csr, SolveMethod, SolveOptions, SolveStats};
pub use sweep::{
    consistency_check, exhaustion_sweep, manufactured_check, maximum_principle_check, BarrierKind, BumpRecipe,
    ConsistencyReport, ManufacturedReport, MaxPrincipleReport, SweepReport, SweepRow,
};

use crate::error::SolverError;
use crate::weights::WeightVector;
use std::sync::Arc;

/// Nodal values on a [`Grid2D`]; `components` values per node.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub grid: Arc<Grid2D>,
    pub components: usize,
    pub values: Vec<f64>,
}

impl DiscreteField {
    pub fn scalar(grid: Arc<Grid2D>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "one value per node");
        Self { grid, components: 1, values }
    }

    pub fn zeros(grid: Arc<Grid2D>) -> Self {
        let n = grid.len();
        Self::scalar(grid, vec![0.0; n])
    }

    pub fn get(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.components..(idx + 1) * self.components]
    }

    /// Pointwise norm; tensor components are taken in an orthonormal frame.
    pub fn norm_at(&self, idx: usize) -> f64 {
        self.get(idx).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }
}

/// `max |u| / sigma^mu` over the nodes of the exhaustion domain.
pub fn weighted_sup_norm(u: &DiscreteField, w: &WeightVector) -> f64 {
    let g = &u.grid;
    (0..g.len())
        .filter(|&idx| g.in_domain(idx))
        .map(|idx| u.norm_at(idx) / g.weight(w, idx))
        .fold(0.0, f64::max)
}

/// Five-point stencil `[centre, east, west, north, south]` of `Delta + K`
/// in divergence form.
type Stencil = [f64; 5];

/// `Delta + K` on a grid, with Dirichlet nodes eliminated.
///
/// `matrix` is the volume-weighted form `W (Delta + K)`, which is symmetric.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    pub grid: Arc<Grid2D>,
    pub k: f64,
    pub matrix: Csr,
    pub volume: Vec<f64>,
    pub unknown_nodes: Vec<usize>,
    pub symmetric: bool,
    node_to_unknown: Vec<Option<usize>>,
    stencils: Vec<Option<Stencil>>,
}

fn stencil_at(g: &Grid2D, i: usize, j: usize, k: f64) -> Stencil {
    let (ha, hb) = (g.axes[0].spacing, g.axes[1].spacing);
    let (a, b) = (g.axes[0].at(i), g.axes[1].at(j));
    let (_, _, v0) = g.coefficients(a, b);
    let flux_a = |a: f64| {
        let (gaa, _, v) = g.coefficients(a, b);
        v / gaa / (v0 * ha * ha)
    };
    let flux_b = |b: f64| {
        let (_, gbb, v) = g.coefficients(a, b);
        v / gbb / (v0 * hb * hb)
    };
    let e = flux_a(a + ha / 2.0);
    let w = flux_a(a - ha / 2.0);
    let n = flux_b(b + hb / 2.0);
    let s = if g.axis_wall && j == 0 { 0.0 } else { flux_b(b - hb / 2.0) };
    [e + w + n + s + k, e, w, n, s]
}

/// Assembles `Delta + K` on the grid.
pub fn assemble(grid: Arc<Grid2D>, k: f64) -> Result<SparseOperator, SolverError> {
    let (nx, ny) = grid.shape();
    let (ha, hb) = (grid.axes[0].spacing, grid.axes[1].spacing);
    let mut stencils = vec![None; grid.len()];
    for j in 0..ny {
        for i in 0..nx {
            let side_a = i == 0 || i == nx - 1;
            let side_b = (j == 0 && !grid.axis_wall) || j == ny - 1;
            if !side_a && !side_b {
                let st = stencil_at(&grid, i, j, k);
                if st.iter().any(|c| !c.is_finite()) {
                    return Err(SolverError::InvalidGrid(format!("non-finite coefficients at node ({i}, {j})")));
                }
                stencils[grid.index(i, j)] = Some(st);
            }
        }
    }
    let unknown_nodes: Vec<usize> = (0..grid.len()).filter(|&idx| grid.is_unknown(idx)).collect();
    if unknown_nodes.is_empty() {
        return Err(SolverError::GridTooCoarse("no unknowns inside the exhaustion domain".into()));
    }
    let mut node_to_unknown = vec![None; grid.len()];
    for (u, &idx) in unknown_nodes.iter().enumerate() {
        node_to_unknown[idx] = Some(u);
    }
    let mut volume = Vec::with_capacity(unknown_nodes.len());
    let mut rows = Vec::with_capacity(unknown_nodes.len());
    for &idx in &unknown_nodes {
        let (i, j) = (idx % nx, idx / nx);
        let (a, b) = grid.coords(idx);
        let wgt = grid.coefficients(a, b).2 * ha * hb;
        let st = stencils[idx].expect("unknowns are interior");
        let mut row = vec![(node_to_unknown[idx].unwrap(), wgt * st[0])];
        let nbrs = [(i + 1, j, 1), (i.wrapping_sub(1), j, 2), (i, j + 1, 3), (i, j.wrapping_sub(1), 4)];
        for (ni, nj, s) in nbrs {
            if ni >= nx || nj >= ny || st[s] == 0.0 {
                continue;
            }
            if let Some(c) = node_to_unknown[grid.index(ni, nj)] {
                row.push((c, -wgt * st[s]));
            }
        }
        volume.push(wgt);
        rows.push(row);
    }
    let matrix = Csr::from_rows(rows);
    let symmetric = matrix.is_symmetric(1e-10);
    Ok(SparseOperator { grid, k, matrix, volume, unknown_nodes, symmetric, node_to_unknown, stencils })
}

impl SparseOperator {
    /// `(Delta + K) u` at every box-interior node using the nodal values of
    /// `u` everywhere (no Dirichlet elimination); other nodes get `NaN`.
    pub fn apply_full(&self, u: &DiscreteField) -> DiscreteField {
        let (nx, _) = self.grid.shape();
        let v = &u.values;
        let out = (0..self.grid.len())
            .map(|idx| match self.stencils[idx] {
                Some(st) => {
                    let mut r = st[0] * v[idx] - st[1] * v[idx + 1] - st[2] * v[idx - 1] - st[3] * v[idx + nx];
                    if st[4] != 0.0 {
                        r -= st[4] * v[idx - nx];
                    }
                    r
                }
                None => f64::NAN,
            })
            .collect();
        DiscreteField::scalar(self.grid.clone(), out)
    }

    /// Whether `(Delta + K)` is evaluated at this node by [`Self::apply_full`].
    pub fn is_interior(&self, idx: usize) -> bool {
        self.stencils[idx].is_some()
    }

    pub fn unknown_of(&self, idx: usize) -> Option<usize> {
        self.node_to_unknown[idx]
    }

    /// `(Delta + K) u` on unknowns with `u = 0` at Dirichlet nodes.
    pub fn apply(&self, u: &DiscreteField) -> DiscreteField {
        let x: Vec<f64> = self.unknown_nodes.iter().map(|&idx| u.values[idx]).collect();
        let y = self.matrix.matvec(&x);
        let mut out = vec![0.0; self.grid.len()];
        for ((&idx, yk), wk) in self.unknown_nodes.iter().zip(y).zip(&self.volume) {
            out[idx] = yk / wk;
        }
        DiscreteField::scalar(self.grid.clone(), out)
    }
}

/// Solves `(Delta + K) u = f` on the unknowns with `u = 0` elsewhere.
///
/// The returned residual is `||(Delta + K) u - f||_inf / ||f||_inf` over the
/// unknowns.
pub fn solve_dirichlet(
    op: &SparseOperator,
    f: &DiscreteField,
    opts: &SolveOptions,
) -> Result<(DiscreteField, SolveStats), SolverError> {
    let b: Vec<f64> = op.unknown_nodes.iter().zip(&op.volume).map(|(&idx, w)| w * f.values[idx]).collect();
    let fmax = op.unknown_nodes.iter().fold(0.0f64, |m, &idx| m.max(f.values[idx].abs()));
    let mut inner = *opts;
    let mut last = None;
    for _ in 0..6 {
        let (x, mut stats) = match solve(&op.matrix, &b, &inner) {
            Err(SolverError::NonConvergence { indefinite: false, .. }) => {
                let x = banded_lu_solve(&op.matrix, &b)?;
                (x, SolveStats { method: SolveMethod::BandedLu, iterations: 0, residual: 0.0 })
            }
            other => other?,
        };
        let mut u = vec![0.0; op.grid.len()];
        for (&idx, xk) in op.unknown_nodes.iter().zip(&x) {
            u[idx] = *xk;
        }
        let u = DiscreteField::scalar(op.grid.clone(), u);
        let au = op.apply(&u);
        let res = op.unknown_nodes.iter().fold(0.0f64, |m, &idx| m.max((au.values[idx] - f.values[idx]).abs()));
        stats.residual = if fmax > 0.0 { res / fmax } else { res };
        if stats.residual <= opts.rtol || stats.method == SolveMethod::BandedLu {
            return Ok((u, stats));
        }
        inner.rtol *= 0.05;
        last = Some(stats);
    }
    let stats = last.expect("at least one attempt");
    Err(SolverError::NonConvergence { iterations: stats.iterations, residual: stats.residual, indefinite: false })
}
