//! Finite-difference tensor calculus on chart metrics.
//!
//! Conventions: `R_ijk^l = d_i Gamma^l_jk - d_j Gamma^l_ik + ..`, `R_ijkl = g_lm R_ijk^m`,
//! `Rc_jk = R_ijk^i`, `Delta = nabla* nabla >= 0`, `delta_g t = -g^ij nabla_i t_jk`.

mod curvature;
mod fd;
mod field;
mod operators;

pub use curvature::{christoffels_at, difference_tensor_at, ricci_at, ricci_split_at, riemann_at};
pub use fd::{FdScheme, FdValue, Tensor3, Tensor4};
pub use field::{MetricField, ScalarField, SymTensorField};
pub use operators::{
    bianchi_ops_at, covariant_derivative_at, default_k_pair, deturck_field_at, g_operator, gauge_term_at, laplacian_scalar_at,
    lichnerowicz_at, lichnerowicz_hyperbolic_at, norm_sq_with, rough_laplacian_tensor_at, sym_cov_deriv_at,
    trace_with, BianchiOps, L_at, Q_at, Q_at_with_base,
};

use crate::charts::{Chart, ChartPoint};
use crate::error::TensorError;
use std::sync::Arc;

/// A rank-3 tensor field, e.g. a connection difference.
#[derive(Clone)]
pub struct Tensor3Field {
    chart: Arc<Chart>,
    eval: Arc<dyn Fn(&[f64]) -> Result<Tensor3, TensorError> + Send + Sync>,
}

impl Tensor3Field {
    pub fn new(
        chart: impl Into<Arc<Chart>>,
        eval: impl Fn(&[f64]) -> Result<Tensor3, TensorError> + Send + Sync + 'static,
    ) -> Self {
        Self { chart: chart.into(), eval: Arc::new(eval) }
    }

    /// The field `p -> A(p)` of [`difference_tensor_at`].
    pub fn difference(g: &MetricField, h: &MetricField, fd: FdScheme) -> Self {
        let (g, h) = (g.clone(), h.clone());
        let chart = Arc::new(h.chart().clone());
        Self::new(chart, move |x| difference_tensor_at(&g, &h, &ChartPoint(x.to_vec()), &fd))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn at(&self, x: &[f64]) -> Result<Tensor3, TensorError> {
        self.chart.check_point(&ChartPoint(x.to_vec()))?;
        (self.eval)(x)
    }
}
