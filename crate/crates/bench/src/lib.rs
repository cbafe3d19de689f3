//! Shared inputs for the benchmarks.

use pelab_core::expansion::{BoundaryData, ExpansionMetric};
use pelab_core::solver::{Grid2D, GridBox};
use pelab_core::{Chart, MetricField};
use std::sync::Arc;

pub fn cusp_metric() -> (MetricField, pelab_core::ChartPoint) {
    let chart = Chart::intermediate_cusp(4, 1).expect("valid chart");
    let p = chart.reference_point();
    (MetricField::from_chart(chart), p)
}

pub fn cusp_grid(eps: f64, spacing: f64) -> Arc<Grid2D> {
    let chart = Chart::intermediate_cusp(4, 1).expect("valid chart");
    Arc::new(Grid2D::exhaustion(chart, eps, spacing, GridBox::default()).expect("valid grid"))
}

pub fn first_stage() -> ExpansionMetric {
    ExpansionMetric::first(&BoundaryData::seeded(4, 1, 0.05).expect("valid data")).expect("valid data")
}
