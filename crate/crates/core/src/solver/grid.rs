use crate::charts::{BoundaryMetric, Chart, ChartKind, ChartPoint};
use crate::error::SolverError;
use crate::weights::WeightVector;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const MIN_NODES: usize = 8;

/// One uniform axis in mapped coordinates: node `k` sits at `lo + k * spacing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub spacing: f64,
    pub nodes: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, nodes: usize) -> Self {
        Self { lo, spacing: (hi - lo) / (nodes.max(2) - 1) as f64, nodes }
    }

    pub fn at(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.spacing
    }

    pub fn hi(&self) -> f64 {
        self.at(self.nodes - 1)
    }
}

/// Reduced two-dimensional grid on a chart.
///
/// Coordinates are mapped so that the spacing is uniform:
/// cusp `(ln r, asinh(tan theta0))`, collar `(ln rho, y1)`, maximal cusp
/// `(ln r, w1)`. Functions are taken independent of all other coordinates.
/// The four sides are Dirichlet, except that with `axis_wall` the lower
/// side of the second axis is the cusp axis `theta0 = 0`, which sits half
/// a cell below the first node and carries no flux.
#[derive(Debug, Clone)]
pub struct Grid2D {
    pub chart: Chart,
    pub axes: [Axis; 2],
    pub eps: f64,
    pub axis_wall: bool,
    sigma: Vec<f64>,
    unknown: Vec<bool>,
}

/// Outer box of an exhaustion grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    /// Upper end of the `ln r` / `ln rho` axis.
    pub a_hi: f64,
    /// Half-width of the flat transverse axis (collar and maximal cusp).
    pub b_half: f64,
}

impl Default for GridBox {
    fn default() -> Self {
        Self { a_hi: 2f64.ln(), b_half: 1.5 }
    }
}

impl Grid2D {
    pub fn new(chart: Chart, axes: [Axis; 2], eps: f64, axis_wall: bool) -> Result<Self, SolverError> {
        chart.validate()?;
        match chart.kind {
            ChartKind::IntermediateCusp | ChartKind::MaximalCusp => {}
            ChartKind::Collar if chart.h_u == BoundaryMetric::Euclidean => {}
            _ => {
                return Err(SolverError::InvalidGrid(format!(
                    "no reduced grid for {:?} with {:?}",
                    chart.kind, chart.h_u
                )))
            }
        }
        if !(eps > 0.0) {
            return Err(SolverError::Chart(crate::ChartError::NonPositiveEps(eps)));
        }
        for (i, ax) in axes.iter().enumerate() {
            if ax.nodes < MIN_NODES {
                return Err(SolverError::GridTooCoarse(format!("axis {i} has {} nodes, need {MIN_NODES}", ax.nodes)));
            }
            if !(ax.spacing > 0.0 && ax.lo.is_finite() && ax.hi().is_finite()) {
                return Err(SolverError::InvalidGrid(format!("axis {i}: {ax:?}")));
            }
        }
        if axis_wall && chart.kind != ChartKind::IntermediateCusp {
            return Err(SolverError::InvalidGrid("axis wall only exists on cusp grids".into()));
        }
        if chart.kind == ChartKind::IntermediateCusp {
            let lo = axes[1].lo;
            if axis_wall && (lo - axes[1].spacing / 2.0).abs() > 1e-12 * axes[1].spacing.max(1.0) {
                return Err(SolverError::InvalidGrid("axis wall needs the first node half a cell from theta0 = 0".into()));
            }
            if lo <= 0.0 {
                return Err(SolverError::InvalidGrid("theta0 axis must start above 0".into()));
            }
        }
        let mut g = Self { chart, axes, eps, axis_wall, sigma: Vec::new(), unknown: Vec::new() };
        let (nx, ny) = g.shape();
        g.sigma = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let p = g.chart_point(i, j);
                let s = g.chart.sigma_at(&p).map_err(|e| SolverError::InvalidGrid(format!("node ({i}, {j}): {e}")))?;
                g.sigma.push(s);
            }
        }
        g.unknown = (0..nx * ny)
            .map(|idx| {
                let (i, j) = (idx % nx, idx / nx);
                let side_a = i == 0 || i == nx - 1;
                let side_b = (j == 0 && !axis_wall) || j == ny - 1;
                !side_a && !side_b && g.sigma[idx] >= eps
            })
            .collect();
        Ok(g)
    }

    /// Grid covering `{sigma >= eps}` inside `bx`, with nodes on a lattice of
    /// the given spacing anchored at the outer side, so grids for different
    /// `eps` share their nodes.
    pub fn exhaustion(chart: Chart, eps: f64, spacing: f64, bx: GridBox) -> Result<Self, SolverError> {
        if !(spacing > 0.0) {
            return Err(SolverError::InvalidGrid(format!("spacing {spacing}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(SolverError::InvalidGrid(format!("eps {eps} outside (0, 1)")));
        }
        let steps_below = ((bx.a_hi - eps.ln()) / spacing).ceil() as usize + 2;
        let a = Axis { lo: bx.a_hi - steps_below as f64 * spacing, spacing, nodes: steps_below + 1 };
        match chart.kind {
            ChartKind::IntermediateCusp => {
                let eta_max = (1.0 / eps).acosh();
                let nodes = ((eta_max / spacing).ceil() as usize) + 3;
                let b = Axis { lo: spacing / 2.0, spacing, nodes };
                Self::new(chart, [a, b], eps, true)
            }
            _ => {
                let nodes = (2.0 * bx.b_half / spacing).round() as usize + 1;
                let b = Axis::new(-bx.b_half, bx.b_half, nodes);
                Self::new(chart, [a, b], eps, false)
            }
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axes[0].nodes, self.axes[1].nodes)
    }

    pub fn len(&self) -> usize {
        self.axes[0].nodes * self.axes[1].nodes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.axes[0].nodes + i
    }

    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let nx = self.axes[0].nodes;
        (self.axes[0].at(idx % nx), self.axes[1].at(idx / nx))
    }

    /// Whether the node is a solver unknown (inside `{sigma >= eps}` and
    /// off the Dirichlet sides).
    pub fn is_unknown(&self, idx: usize) -> bool {
        self.unknown[idx]
    }

    pub fn in_domain(&self, idx: usize) -> bool {
        self.sigma[idx] >= self.eps
    }

    pub fn sigma(&self, idx: usize) -> f64 {
        self.sigma[idx]
    }

    /// Full chart point of node `(i, j)`; inactive coordinates are taken
    /// from the chart's reference point.
    pub fn chart_point(&self, i: usize, j: usize) -> ChartPoint {
        self.chart_point_at(self.axes[0].at(i), self.axes[1].at(j))
    }

    pub fn chart_point_at(&self, a: f64, b: f64) -> ChartPoint {
        let mut x = self.chart.reference_point().0;
        x[0] = a.exp();
        x[1] = match self.chart.kind {
            ChartKind::IntermediateCusp => b.sinh().atan(),
            _ => b,
        };
        ChartPoint(x)
    }

    /// `(g_aa, g_bb, sqrt(det g) up to factors of the inactive coordinates)` at
    /// mapped coordinates `(a, b)`.
    pub fn coefficients(&self, a: f64, b: f64) -> (f64, f64, f64) {
        let n = self.chart.n as f64;
        match self.chart.kind {
            ChartKind::IntermediateCusp => {
                let f = self.chart.f as i32;
                let bb = self.chart.b() as i32;
                let (ch, sh) = (b.cosh(), b.sinh());
                let vol = (f as f64 * a).exp() * ch.powi(f + 1) * sh.abs().powi(bb - 1);
                (ch * ch, 1.0, vol)
            }
            ChartKind::Collar => (1.0, (-2.0 * a).exp(), (-(n - 1.0) * a).exp()),
            _ => (1.0, (2.0 * a).exp(), ((n - 1.0) * a).exp()),
        }
    }

    /// `sigma^mu` built from the untruncated boundary defining functions:
    /// `r^mu_1 cos(theta0)^mu_0` on a cusp, `rho^mu_0` on the collar,
    /// `r^mu_1` on a maximal cusp.
    pub fn weight_at(&self, w: &WeightVector, a: f64, b: f64) -> f64 {
        let mu1 = w.mus.first().copied().unwrap_or(0.0);
        match self.chart.kind {
            ChartKind::IntermediateCusp => (mu1 * a).exp() / b.cosh().powf(w.mu0),
            ChartKind::Collar => (w.mu0 * a).exp(),
            _ => (mu1 * a).exp(),
        }
    }

    pub fn weight(&self, w: &WeightVector, idx: usize) -> f64 {
        let (a, b) = self.coords(idx);
        self.weight_at(w, a, b)
    }

    /// Samples a function of mapped coordinates at every node.
    pub fn sample(self: &Arc<Self>, f: impl Fn(f64, f64) -> f64) -> super::DiscreteField {
        let values = (0..self.len()).map(|idx| {
            let (a, b) = self.coords(idx);
            f(a, b)
        });
        super::DiscreteField::scalar(self.clone(), values.collect())
    }

    pub fn unknown_count(&self) -> usize {
        self.unknown.iter().filter(|&&u| u).count()
    }
}
