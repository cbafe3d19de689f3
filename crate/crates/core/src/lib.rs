//! Numerical laboratory for geometrically finite hyperbolic metrics and
//! their Einstein perturbations.
//!
//! The crate is organised bottom-up:
//!
//! * [`charts`]: model coordinate charts, boundary defining functions,
//!   exhaustion domains and the half-ball rescalings.
//! * [`tensorcalc`]: finite-difference tensor calculus on chart metrics,
//!   up to the gauge-adjusted Einstein operator and its linearization.
//! * [`weights`]: weight windows, barrier coefficients and indicial roots.
//! * [`solver`]: reduced Dirichlet problems on exhaustion domains, the
//!   integral identity for trace-free tensors and the rescaling scans.
//! * [`expansion`]: boundary-data extension and the order-by-order
//!   approximate solution.

pub mod charts;
pub mod config;
pub mod error;
pub mod expansion;
pub mod smooth;
pub mod solver;
pub mod tensorcalc;
pub mod weights;

pub use charts::{BoundaryMetric, Chart, ChartKind, ChartPoint, RescalingCase, RescalingKind};
pub use error::{ChartError, ExpansionError, SolverError, TensorError, WeightError};
pub use tensorcalc::{FdScheme, MetricField, ScalarField, SymTensorField};
pub use weights::WeightVector;
