use crate::charts::{Chart, ChartPoint};
use crate::error::TensorError;
use nalgebra::DMatrix;
use std::fmt;
use std::sync::Arc;

type MatFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// A symmetric 2-tensor field in chart coordinates.
///
/// Evaluation checks the point against the chart first, so finite-difference
/// stencils that leave the chart surface as a [`crate::ChartError`].
#[derive(Clone)]
pub struct SymTensorField {
    chart: Arc<Chart>,
    label: String,
    eval: MatFn,
}

impl fmt::Debug for SymTensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymTensorField").field("label", &self.label).field("kind", &self.chart.kind).finish()
    }
}

impl SymTensorField {
    pub fn new(
        chart: impl Into<Arc<Chart>>,
        label: impl Into<String>,
        eval: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { chart: chart.into(), label: label.into(), eval: Arc::new(eval) }
    }

    pub fn zero(chart: impl Into<Arc<Chart>>) -> Self {
        let chart = chart.into();
        let n = chart.n;
        Self::new(chart, "0", move |_| DMatrix::zeros(n, n))
    }

    /// A field with the same components at every point.
    pub fn constant(chart: impl Into<Arc<Chart>>, value: DMatrix<f64>) -> Self {
        Self::new(chart, "const", move |_| value.clone())
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn chart_arc(&self) -> Arc<Chart> {
        self.chart.clone()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.chart.n
    }

    pub fn at(&self, x: &[f64]) -> Result<DMatrix<f64>, TensorError> {
        self.chart.check_point(&ChartPoint(x.to_vec()))?;
        Ok((self.eval)(x))
    }

    /// Evaluation without the chart check, for callers that already know
    /// the point is valid.
    pub fn at_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        (self.eval)(x)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self::new(self.chart.clone(), format!("{}*{}", c, self.label), move |x| inner(x) * c)
    }

    pub fn add(&self, other: &SymTensorField) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self::new(self.chart.clone(), format!("{}+{}", self.label, other.label), move |x| a(x) + b(x))
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &SymTensorField) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self::new(self.chart.clone(), format!("{}+{}*{}", self.label, c, other.label), move |x| a(x) + b(x) * c)
    }

    /// Pointwise product with a scalar field.
    pub fn times(&self, phi: &ScalarField) -> Self {
        let (a, p) = (self.eval.clone(), phi.eval.clone());
        Self::new(self.chart.clone(), format!("{}*{}", phi.label, self.label), move |x| a(x) * p(x))
    }
}

/// A Riemannian metric: a symmetric 2-tensor field that is positive definite
/// wherever it is evaluated.
#[derive(Clone, Debug)]
pub struct MetricField(SymTensorField);

impl MetricField {
    /// The closed-form hyperbolic metric of a chart.
    pub fn from_chart(chart: impl Into<Arc<Chart>>) -> Self {
        let chart: Arc<Chart> = chart.into();
        let c = chart.clone();
        let label = format!("h[{:?}]", chart.kind);
        Self(SymTensorField::new(chart, label, move |x| {
            DMatrix::from_diagonal(&c.metric_diagonal_unchecked(x).into())
        }))
    }

    pub fn new(
        chart: impl Into<Arc<Chart>>,
        label: impl Into<String>,
        eval: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Self(SymTensorField::new(chart, label, eval))
    }

    /// Reinterprets a tensor field as a metric; positivity is checked at
    /// evaluation time by the operators that invert it.
    pub fn from_tensor(t: SymTensorField) -> Self {
        Self(t)
    }

    pub fn tensor(&self) -> &SymTensorField {
        &self.0
    }

    pub fn chart(&self) -> &Chart {
        self.0.chart()
    }

    pub fn label(&self) -> &str {
        self.0.label()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn at(&self, x: &[f64]) -> Result<DMatrix<f64>, TensorError> {
        self.0.at(x)
    }

    /// `self + e`.
    pub fn perturbed(&self, e: &SymTensorField) -> MetricField {
        MetricField(self.0.add(e))
    }

    pub fn scaled(&self, c: f64) -> MetricField {
        MetricField(self.0.scaled(c))
    }

    pub fn with_label(self, label: impl Into<String>) -> Self {
        Self(self.0.with_label(label))
    }
}

/// A scalar function on a chart.
#[derive(Clone)]
pub struct ScalarField {
    label: String,
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField").field("label", &self.label).finish()
    }
}

impl ScalarField {
    pub fn new(label: impl Into<String>, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), eval: Arc::new(eval) }
    }

    pub fn at(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Inverse of a symmetric positive-definite matrix.
pub(crate) fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>, TensorError> {
    m.clone().cholesky().map(|c| c.inverse()).ok_or(TensorError::SingularMetric)
}

/// Inverse of a general (symmetric) matrix.
pub(crate) fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>, TensorError> {
    m.clone().try_inverse().ok_or(TensorError::SingularMetric)
}
