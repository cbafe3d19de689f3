use thiserror::Error;

/// Failures raised while constructing charts or evaluating chart quantities.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("point has {got} coordinates, chart expects {expected}")]
    WrongDimension { expected: usize, got: usize },
    #[error("coordinate {index} = {value} outside ({lo}, {hi})")]
    OutOfRange {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("degenerate point: {0}")]
    Degenerate(&'static str),
    #[error("coordinate {index} = {value} inside the pole-exclusion margin {margin}")]
    PoleExcluded { index: usize, value: f64, margin: f64 },
    #[error("exhaustion parameter must be positive, got {0}")]
    NonPositiveEps(f64),
    #[error("rescaling case invariant violated: {0}")]
    CaseInvariant(String),
    #[error("point lies outside the reference half-ball")]
    OutsideHalfBall,
    #[error("config: {0}")]
    Config(String),
}

/// Failures of the finite-difference tensor engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("singular metric at stencil point")]
    SingularMetric,
    #[error("tensor field mismatch: {0}")]
    Mismatch(String),
}

/// Failures of the weight algebra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),
    #[error("no positive weight exists at cusp {index} (rank {rank}, n = {n}): {reason}")]
    AdmissibilityObstruction {
        index: usize,
        rank: usize,
        n: usize,
        reason: String,
    },
    #[error("dimension {0} too small: the H0 weight window is empty")]
    DimensionTooSmall(usize),
    #[error("indicial equation has complex roots (discriminant {0})")]
    NoRealIndicialRoots(f64),
}

/// Failures of grid assembly and the linear solves.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(
        "no convergence after {iterations} iterations (relative residual {residual:.3e}{})",
        if *indefinite { ", operator indefinite" } else { "" }
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        indefinite: bool,
    },
    #[error("support touches the grid boundary margin at node ({0}, {1})")]
    SupportViolation(usize, usize),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Chart(#[from] ChartError),
}

/// Failures of the asymptotic-expansion construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpansionError {
    #[error("boundary data invalid: {0}")]
    InvalidBoundaryData(String),
    #[error("extended metric not positive definite at rho = {rho}, y = {y:?}")]
    NotPositive { rho: f64, y: Vec<f64> },
    #[error("indicial matrix singular at exponent {exponent} (stage {stage})")]
    CharacteristicExponentHit { exponent: f64, stage: usize },
    #[error("leading-coefficient extraction did not stabilize (spread {spread:.3e})")]
    IndicialExtractionFailure { spread: f64 },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Chart(#[from] ChartError),
}
