//! Formal expansion of a collar metric with prescribed conformal infinity:
//! the extension of boundary data, indicial corrections and the fitted order
//! of vanishing of `Q` after each stage.

mod boundary;
mod indicial;
mod spline;
mod stages;

pub use boundary::{extend, BoundaryData, QHat, T_map};
pub use indicial::{
    extract, indicial_matrix, leading_coefficient, richardson, solve_indicial, sym_basis, sym_to_vec, vec_to_sym, Extraction,
    SINGULAR_TOL,
};
pub use spline::{ClampedSpline, TensorSpline};
pub use stages::{
    correction_step, default_rho_samples, default_y_samples, expansion_ladder, stage_threshold, vanishing_order,
    Coefficient, CorrectionReport, ExpansionMetric, ExpansionOptions, LadderReport, PerY, StageReport, Term,
    VanishingReport,
};
