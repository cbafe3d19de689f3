use super::{assemble, solve_dirichlet, weighted_sup_norm, Axis, DiscreteField, Grid2D, GridBox, SolveOptions};
use crate::charts::{Chart, ChartKind};
use crate::error::SolverError;
use crate::smooth::bump;
use crate::weights::{barrier_H0, barrier_cusp, barrier_maximal, WeightVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Tensor-product bump in mapped coordinates, multiplied by `sigma^mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpRecipe {
    pub center: (f64, f64),
    pub radius: (f64, f64),
}

impl BumpRecipe {
    /// Bump inside `{sigma >= 0.2}` for every supported chart kind.
    pub fn default_for(kind: ChartKind) -> Self {
        match kind {
            ChartKind::IntermediateCusp => Self { center: (0.6f64.ln(), 0.5f64.tan().asinh()), radius: (0.5, 0.4) },
            _ => Self { center: (0.5f64.ln(), 0.0), radius: (0.5, 0.6) },
        }
    }

    pub fn bump_at(&self, a: f64, b: f64) -> f64 {
        bump((a - self.center.0) / self.radius.0) * bump((b - self.center.1) / self.radius.1)
    }

    pub fn sample(&self, grid: &Arc<Grid2D>, w: &WeightVector) -> DiscreteField {
        grid.sample(|a, b| grid.weight_at(w, a, b) * self.bump_at(a, b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedReport {
    pub eps: f64,
    pub unknowns: usize,
    pub iterations: usize,
    pub residual: f64,
    /// `||u - u*||_inf / ||u*||_inf`.
    pub rel_error: f64,
}

/// Solves with `f := (Delta + K) u*` for `u* = sigma^mu * bump` and compares.
pub fn manufactured_check(
    grid: Arc<Grid2D>,
    k: f64,
    w: &WeightVector,
    recipe: &BumpRecipe,
    opts: &SolveOptions,
) -> Result<ManufacturedReport, SolverError> {
    let exact = recipe.sample(&grid, w);
    let (nx, _) = grid.shape();
    if let Some(idx) = (0..grid.len()).find(|&idx| !grid.is_unknown(idx) && exact.values[idx] != 0.0) {
        return Err(SolverError::SupportViolation(idx % nx, idx / nx));
    }
    let op = assemble(grid.clone(), k)?;
    let mut f = op.apply_full(&exact);
    for (idx, v) in f.values.iter_mut().enumerate() {
        if !grid.is_unknown(idx) {
            *v = 0.0;
        }
    }
    let (u, stats) = solve_dirichlet(&op, &f, opts)?;
    let err = u.values.iter().zip(&exact.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(ManufacturedReport {
        eps: grid.eps,
        unknowns: op.unknown_nodes.len(),
        iterations: stats.iterations,
        residual: stats.residual,
        rel_error: err / exact.max_abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub nodes: usize,
    pub unknowns: usize,
    pub iterations: usize,
    pub norm_u: f64,
    pub norm_f: f64,
    pub ratio: f64,
    pub manufactured_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub k: f64,
    pub spacing: f64,
    pub weights: WeightVector,
    pub rows: Vec<SweepRow>,
    /// `max ratio / min ratio`.
    pub spread: f64,
    pub max_manufactured_error: f64,
}

/// Solves `(Delta + K) u = sigma^mu * bump` on `{sigma >= eps}` for each eps.
#[allow(clippy::too_many_arguments)]
pub fn exhaustion_sweep(
    chart: &Chart,
    k: f64,
    w: &WeightVector,
    recipe: &BumpRecipe,
    eps_list: &[f64],
    spacing: f64,
    opts: &SolveOptions,
    manufactured_opts: &SolveOptions,
) -> Result<SweepReport, SolverError> {
    if eps_list.windows(2).any(|p| p[1] >= p[0]) {
        return Err(SolverError::InvalidGrid("eps list must be strictly decreasing".into()));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let grid = Arc::new(Grid2D::exhaustion(chart.clone(), eps, spacing, GridBox::default())?);
        let op = assemble(grid.clone(), k)?;
        let f = recipe.sample(&grid, w);
        let (u, stats) = solve_dirichlet(&op, &f, opts)?;
        let norm_u = weighted_sup_norm(&u, w);
        let norm_f = weighted_sup_norm(&f, w);
        let m = manufactured_check(grid.clone(), k, w, recipe, manufactured_opts)?;
        rows.push(SweepRow {
            eps,
            nodes: grid.len(),
            unknowns: op.unknown_nodes.len(),
            iterations: stats.iterations,
            norm_u,
            norm_f,
            ratio: norm_u / norm_f,
            manufactured_rel_error: m.rel_error,
        });
    }
    let max = rows.iter().map(|r| r.ratio).fold(f64::MIN, f64::max);
    let min = rows.iter().map(|r| r.ratio).fold(f64::MAX, f64::min);
    let max_manufactured_error = rows.iter().map(|r| r.manufactured_rel_error).fold(0.0, f64::max);
    Ok(SweepReport { k, spacing, weights: w.clone(), rows, spread: max / min, max_manufactured_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierKind {
    Cusp,
    Collar,
    Maximal,
}

impl BarrierKind {
    fn of(kind: ChartKind) -> Self {
        match kind {
            ChartKind::IntermediateCusp => Self::Cusp,
            ChartKind::Collar => Self::Collar,
            _ => Self::Maximal,
        }
    }
}

/// Continuous `(Delta + K) sigma^mu / sigma^mu` at mapped coordinates.
fn closed_ratio(grid: &Grid2D, k: f64, w: &WeightVector, b: f64) -> Result<f64, SolverError> {
    let n = grid.chart.n;
    let mu1 = w.mus.first().copied().unwrap_or(0.0);
    Ok(match BarrierKind::of(grid.chart.kind) {
        BarrierKind::Cusp => {
            let (c, s) = barrier_cusp(k, mu1, w.mu0, grid.chart.f, n)
                .map_err(|e| SolverError::InvalidGrid(e.to_string()))?;
            let cos2 = 1.0 / b.cosh().powi(2);
            c * cos2 + s * (1.0 - cos2)
        }
        BarrierKind::Collar => barrier_H0(k, w.mu0, n),
        BarrierKind::Maximal => barrier_maximal(k, mu1, n),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    pub kind: BarrierKind,
    pub k: f64,
    pub weights: WeightVector,
    pub nodes: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Minimum of the closed form over the same nodes.
    pub closed_min: f64,
    /// Infimum of the closed form over the whole end.
    pub delta: f64,
    pub max_pointwise_error: f64,
    pub tolerance: f64,
    /// `min_ratio >= closed_min - tolerance`.
    pub pass: bool,
    pub all_negative: bool,
}

/// Discrete `(Delta + K) sigma^mu / sigma^mu` at the interior nodes of the
/// exhaustion domain, against its closed form. The tolerance is
/// `2 spacing^2 (1 + |closed_min|)`.
pub fn maximum_principle_check(grid: Arc<Grid2D>, k: f64, w: &WeightVector) -> Result<MaxPrincipleReport, SolverError> {
    let op = assemble(grid.clone(), k)?;
    let weight = grid.sample(|a, b| grid.weight_at(w, a, b));
    let applied = op.apply_full(&weight);
    let (mut min_ratio, mut max_ratio, mut closed_min, mut max_err, mut nodes) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, 0.0f64, 0usize);
    for idx in 0..grid.len() {
        if !op.is_interior(idx) || !grid.in_domain(idx) {
            continue;
        }
        let ratio = applied.values[idx] / weight.values[idx];
        let closed = closed_ratio(&grid, k, w, grid.coords(idx).1)?;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        closed_min = closed_min.min(closed);
        max_err = max_err.max((ratio - closed).abs());
        nodes += 1;
    }
    if nodes == 0 {
        return Err(SolverError::GridTooCoarse("no interior nodes in the exhaustion domain".into()));
    }
    let delta = match BarrierKind::of(grid.chart.kind) {
        BarrierKind::Cusp => {
            let mu1 = w.mus.first().copied().unwrap_or(0.0);
            let (c, s) = barrier_cusp(k, mu1, w.mu0, grid.chart.f, grid.chart.n)
                .map_err(|e| SolverError::InvalidGrid(e.to_string()))?;
            c.min(s)
        }
        _ => closed_min,
    };
    let h = grid.axes[0].spacing.max(grid.axes[1].spacing);
    let tolerance = 2.0 * h * h * (1.0 + closed_min.abs());
    Ok(MaxPrincipleReport {
        kind: BarrierKind::of(grid.chart.kind),
        k,
        weights: w.clone(),
        nodes,
        min_ratio,
        max_ratio,
        closed_min,
        delta,
        max_pointwise_error: max_err,
        tolerance,
        pass: min_ratio >= closed_min - tolerance,
        all_negative: max_ratio < 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub kind: BarrierKind,
    /// `(spacing, max |discrete - closed| / sigma^mu)` per level.
    pub levels: Vec<(f64, f64)>,
    /// `log2` ratios of consecutive errors.
    pub orders: Vec<f64>,
}

/// Applies the assembled operator to `sigma^mu` on a fixed box at each node
/// count and measures the error against the closed form.
pub fn consistency_check(chart: &Chart, k: f64, w: &WeightVector, node_counts: &[usize]) -> Result<ConsistencyReport, SolverError> {
    let (a_range, b_range) = match chart.kind {
        ChartKind::IntermediateCusp => ((-1.5, 0.5), (0.2, 2.0)),
        _ => ((-2.0, 0.0), (-1.0, 1.0)),
    };
    let mut levels = Vec::with_capacity(node_counts.len());
    for &m in node_counts {
        let axes = [Axis::new(a_range.0, a_range.1, m), Axis::new(b_range.0, b_range.1, m)];
        let grid = Arc::new(Grid2D::new(chart.clone(), axes, 1e-12, false)?);
        let op = assemble(grid.clone(), k)?;
        let weight = grid.sample(|a, b| grid.weight_at(w, a, b));
        let applied = op.apply_full(&weight);
        let mut err = 0.0f64;
        for idx in (0..grid.len()).filter(|&i| op.is_interior(i)) {
            let closed = closed_ratio(&grid, k, w, grid.coords(idx).1)?;
            err = err.max((applied.values[idx] / weight.values[idx] - closed).abs());
        }
        levels.push((grid.axes[0].spacing, err));
    }
    let orders = levels.windows(2).map(|p| (p[0].1 / p[1].1).log2() / (p[0].0 / p[1].0).log2()).collect();
    Ok(ConsistencyReport { kind: BarrierKind::of(chart.kind), levels, orders })
}
