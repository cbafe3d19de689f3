use crate::charts::{BoundaryMetric, Chart, ChartPoint};
use crate::error::ExpansionError;
use crate::tensorcalc::{default_k_pair, FdScheme, L_at, MetricField, SymTensorField};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Index pairs `(a, b)`, `a <= b`, of the independent components of a
/// symmetric `n x n` matrix.
pub fn sym_basis(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect()
}

pub fn sym_to_vec(m: &DMatrix<f64>) -> DVector<f64> {
    let basis = sym_basis(m.nrows());
    DVector::from_iterator(basis.len(), basis.iter().map(|&(a, b)| m[(a, b)]))
}

pub fn vec_to_sym(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    for (k, &(a, b)) in sym_basis(n).iter().enumerate() {
        out[(a, b)] = v[k];
        out[(b, a)] = v[k];
    }
    out
}

/// Sample radii and acceptance threshold for extracting the coefficient of
/// `rho^s` as `rho -> 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub rhos: Vec<f64>,
    /// Largest accepted spread between the two highest extrapolants,
    /// relative to the largest scaled sample.
    pub rel_tol: f64,
    /// Absolute floor added to the accepted spread.
    pub abs_tol: f64,
}

impl Default for Extraction {
    fn default() -> Self {
        Self { rhos: (3..=6).map(|k| 2f64.powi(-k)).collect(), rel_tol: 1e-2, abs_tol: 1e-6 }
    }
}

/// Polynomial extrapolation of matrix samples `F(rho_k)` to `rho = 0`
/// (Neville). Returns the extrapolant and the spread between the last two
/// diagonal entries of the tableau.
pub fn richardson(rhos: &[f64], samples: &[DMatrix<f64>]) -> (DMatrix<f64>, f64) {
    let m = samples.len();
    let mut p: Vec<DMatrix<f64>> = samples.to_vec();
    let mut prev = p[m - 1].clone();
    let mut last = p[m - 1].clone();
    for level in 1..m {
        for i in 0..m - level {
            let (xi, xj) = (rhos[i], rhos[i + level]);
            p[i] = (&p[i + 1] * xi - &p[i] * xj) / (xi - xj);
        }
        prev = last;
        last = p[0].clone();
    }
    let spread = (&last - &prev).amax();
    (last, spread)
}

/// Coefficient of `rho^s` in `f(rho)`, assuming `f = rho^s (c_0 + c_1 rho + ..)`.
/// Returns the coefficient, the extrapolation spread and the largest scaled
/// sample, without any acceptance test.
pub fn extract(
    s: f64,
    rhos: &[f64],
    mut f: impl FnMut(usize, f64) -> Result<DMatrix<f64>, ExpansionError>,
) -> Result<(DMatrix<f64>, f64, f64), ExpansionError> {
    let samples = rhos
        .iter()
        .enumerate()
        .map(|(i, &r)| Ok(f(i, r)? * r.powf(-s)))
        .collect::<Result<Vec<DMatrix<f64>>, ExpansionError>>()?;
    let scale = samples.iter().fold(0.0f64, |a, m| a.max(m.amax()));
    let (c, spread) = richardson(rhos, &samples);
    Ok((c, spread, scale))
}

impl Extraction {
    pub fn accepts(&self, spread: f64, scale: f64) -> bool {
        spread <= self.rel_tol * scale + self.abs_tol
    }
}

/// [`extract`] followed by the acceptance test of `ex`.
pub fn leading_coefficient(
    s: f64,
    ex: &Extraction,
    f: impl FnMut(usize, f64) -> Result<DMatrix<f64>, ExpansionError>,
) -> Result<(DMatrix<f64>, f64), ExpansionError> {
    let (c, spread, scale) = extract(s, &ex.rhos, f)?;
    if !ex.accepts(spread, scale) {
        return Err(ExpansionError::IndicialExtractionFailure { spread });
    }
    Ok((c, spread))
}

/// Matrix of the leading action of `L` on `rho^s E_ab` (component scale,
/// so `s = -2` is a multiple of `h`) in the collar with flat boundary.
/// Rows and columns follow [`sym_basis`].
pub fn indicial_matrix(n: usize, s: f64, fd: &FdScheme, ex: &Extraction) -> Result<DMatrix<f64>, ExpansionError> {
    let chart = Arc::new(Chart::collar(n, BoundaryMetric::Euclidean)?);
    let h = MetricField::from_chart(chart.clone());
    let basis = sym_basis(n);
    let mut out = DMatrix::zeros(basis.len(), basis.len());
    for (col, &(a, b)) in basis.iter().enumerate() {
        let mut e = DMatrix::zeros(n, n);
        e[(a, b)] = 1.0;
        e[(b, a)] = 1.0;
        let r = SymTensorField::new(chart.clone(), "rho^s E", move |x| &e * x[0].powf(s));
        let (c, _) = leading_coefficient(s, ex, |_, rho| {
            let mut x = vec![0.0; n];
            x[0] = rho;
            Ok(L_at(&h, &r, default_k_pair(n), &ChartPoint(x), fd)?)
        })?;
        out.set_column(col, &sym_to_vec(&c));
    }
    Ok(out)
}

/// `blockdiag(1, k^{1/2})` for a tangential boundary metric `k`.
fn frame(k: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = k.nrows();
    let eig = k.clone().symmetric_eigen();
    let sq = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
    let isq =
        &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt())) * eig.eigenvectors.transpose();
    let mut p = DMatrix::identity(d + 1, d + 1);
    let mut pinv = DMatrix::identity(d + 1, d + 1);
    p.view_mut((1, 1), (d, d)).copy_from(&sq);
    pinv.view_mut((1, 1), (d, d)).copy_from(&isq);
    (p, pinv)
}

/// Relative size of the smallest singular value below which the indicial
/// matrix is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-6;

/// Solves `I_k(s) q = rhs`, where `I_k` is the indicial matrix transported
/// to a boundary metric `k` by `q -> P q P`, `P = blockdiag(1, k^{1/2})`.
pub fn solve_indicial(
    indicial: &DMatrix<f64>,
    k: &DMatrix<f64>,
    rhs: &DMatrix<f64>,
    s: f64,
    stage: usize,
) -> Result<DMatrix<f64>, ExpansionError> {
    let n = rhs.nrows();
    let sv = indicial.clone().svd(false, false).singular_values;
    if sv.min() <= SINGULAR_TOL * sv.max() {
        return Err(ExpansionError::CharacteristicExponentHit { exponent: s, stage });
    }
    let (p, pinv) = frame(k);
    let flat = sym_to_vec(&(&pinv * rhs * &pinv));
    let sol = indicial.clone().lu().solve(&flat).ok_or(ExpansionError::CharacteristicExponentHit { exponent: s, stage })?;
    Ok(&p * vec_to_sym(&sol, n) * &p)
}
