use super::boundary::BoundaryData;
use super::indicial::{extract, indicial_matrix, solve_indicial, Extraction};
use super::spline::TensorSpline;
use crate::charts::ChartPoint;
use crate::error::ExpansionError;
use crate::tensorcalc::{gauge_term_at, norm_sq_with, FdScheme, MetricField, Q_at_with_base};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Coefficient tensor of one term `psi rho^s c(y1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    /// The extended boundary perturbation `qbar`.
    QBar,
    Spline(TensorSpline),
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub exponent: f64,
    pub coeff: Coefficient,
}

/// `h + sum psi rho^s_k c_k(y1)` in the collar, after `stage` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionMetric {
    pub bd: Arc<BoundaryData>,
    pub terms: Vec<Term>,
    pub stage: usize,
}

impl ExpansionMetric {
    /// Stage 1: `T(g) = h + rho^-2 psi qbar`.
    pub fn first(bd: &BoundaryData) -> Result<Self, ExpansionError> {
        bd.validate()?;
        Ok(Self { bd: Arc::new(bd.clone()), terms: vec![Term { exponent: -2.0, coeff: Coefficient::QBar }], stage: 1 })
    }

    pub fn coefficient_at(&self, term: &Term, y1: f64) -> DMatrix<f64> {
        match &term.coeff {
            Coefficient::QBar => self.bd.qbar(y1),
            Coefficient::Spline(s) => s.eval(y1),
            Coefficient::Zero => DMatrix::zeros(self.bd.n, self.bd.n),
        }
    }

    /// Components at chart coordinates `x = (rho, y1, ..)`.
    pub fn at(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.bd.n;
        let (rho, y1) = (x[0], x[1]);
        let mut g = DMatrix::identity(n, n) / (rho * rho);
        let psi = self.bd.psi(rho, y1);
        if psi != 0.0 {
            for t in &self.terms {
                g += self.coefficient_at(t, y1) * (psi * rho.powf(t.exponent));
            }
        }
        g
    }

    pub fn metric(&self) -> MetricField {
        let me = self.clone();
        MetricField::new(Arc::new(self.bd.chart()), format!("g_{}", self.stage), move |x| me.at(x))
    }

    pub fn hyperbolic(&self) -> MetricField {
        MetricField::from_chart(Arc::new(self.bd.chart()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionOptions {
    pub fd: FdScheme,
    pub extraction: Extraction,
    /// Spline knots across the support of `qhat`.
    pub knots: usize,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self { fd: FdScheme::fourth_order(2e-3), extraction: Extraction::default(), knots: 33 }
    }
}

fn point(n: usize, rho: f64, y1: f64) -> ChartPoint {
    let mut x = vec![0.0; n];
    x[0] = rho;
    x[1] = y1;
    ChartPoint(x)
}

/// `Q(gl, gr) - Q(base, base)` with every stencil sized by `base`; the
/// subtracted term vanishes in exact arithmetic and carries the
/// discretization error of the background.
fn q_defect(gl: &MetricField, gr: &MetricField, base: &MetricField, background: &DMatrix<f64>, p: &ChartPoint, fd: &FdScheme)
    -> Result<DMatrix<f64>, ExpansionError> {
    Ok(Q_at_with_base(gl, gr, base, p, fd)? - background)
}

/// `Q(base, base)` at `(rho, 0)`; `base` is translation invariant in `y`.
fn background(base: &MetricField, n: usize, rho: f64, fd: &FdScheme) -> Result<DMatrix<f64>, ExpansionError> {
    Ok(Q_at_with_base(base, base, base, &point(n, rho, 0.0), fd)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionReport {
    pub stage: usize,
    pub exponent: f64,
    pub knots: usize,
    pub max_coefficient: f64,
    pub max_spread: f64,
}

/// One indicial correction: extracts the `rho^s` coefficient of
/// `Q(g_j, g_1)`, `s = j - 2`, at spline knots across the support of `qhat`,
/// solves the indicial equation for the new coefficient and appends
/// `psi rho^s q_j`.
pub fn correction_step(
    gj: &ExpansionMetric,
    g1: &ExpansionMetric,
    opts: &ExpansionOptions,
) -> Result<(ExpansionMetric, CorrectionReport), ExpansionError> {
    let n = gj.bd.n;
    let stage = gj.stage;
    let s = stage as f64 - 2.0;
    if stage + 1 > n - 1 {
        return Err(ExpansionError::CharacteristicExponentHit { exponent: s, stage: stage + 1 });
    }
    let indicial = indicial_matrix(n, s, &opts.fd, &opts.extraction)?;
    let mut next = gj.clone();
    next.stage = stage + 1;
    let Some((lo, hi)) = gj.bd.qhat.support() else {
        next.terms.push(Term { exponent: s, coeff: Coefficient::Zero });
        let report = CorrectionReport { stage: stage + 1, exponent: s, knots: 0, max_coefficient: 0.0, max_spread: 0.0 };
        return Ok((next, report));
    };
    // Singularity is a property of the exponent alone; surface it before sampling.
    solve_indicial(&indicial, &DMatrix::identity(n - 1, n - 1), &DMatrix::zeros(n, n), s, stage + 1)?;
    let (gl, gr, base) = (gj.metric(), g1.metric(), gj.hyperbolic());
    let backgrounds = opts
        .extraction
        .rhos
        .iter()
        .map(|&r| background(&base, n, r, &opts.fd))
        .collect::<Result<Vec<_>, _>>()?;
    let knots = opts.knots.max(4);
    let h = (hi - lo) / (knots - 1) as f64;
    let interior = (1..knots - 1)
        .into_par_iter()
        .map(|k| {
            let y = lo + k as f64 * h;
            let (c, spread, scale) = extract(s, &opts.extraction.rhos, |i, rho| {
                q_defect(&gl, &gr, &base, &backgrounds[i], &point(n, rho, y), &opts.fd)
            })?;
            let q = solve_indicial(&indicial, &gj.bd.boundary_metric(y), &(-c), s, stage + 1)?;
            Ok((q, spread, scale))
        })
        .collect::<Result<Vec<_>, ExpansionError>>()?;
    // Acceptance is judged against the whole support: knots near its edges
    // carry only discretization noise.
    let max_spread = interior.iter().fold(0.0f64, |a, r| a.max(r.1));
    let max_scale = interior.iter().fold(0.0f64, |a, r| a.max(r.2));
    if !opts.extraction.accepts(max_spread, max_scale) {
        return Err(ExpansionError::IndicialExtractionFailure { spread: max_spread });
    }
    let mut samples = vec![DMatrix::zeros(n, n)];
    samples.extend(interior.into_iter().map(|r| r.0));
    samples.push(DMatrix::zeros(n, n));
    let max_coefficient = samples.iter().fold(0.0f64, |a, m| a.max(m.amax()));
    next.terms.push(Term { exponent: s, coeff: Coefficient::Spline(TensorSpline::new(lo, h, &samples)) });
    Ok((next, CorrectionReport { stage: stage + 1, exponent: s, knots, max_coefficient, max_spread }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerY {
    pub y: f64,
    pub slope: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    /// Least-squares slope of `log max_y |Q|_h` against `log rho`;
    /// `f64::INFINITY` when `Q` vanishes at every sample.
    pub slope: f64,
    pub residual: f64,
    /// `(rho, max_y |Q|_h)`.
    pub sup: Vec<(f64, f64)>,
    pub per_y: Vec<PerY>,
    pub exact: bool,
}

fn fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let res = (pts.iter().map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum::<f64>() / m).sqrt();
    (slope, res)
}

fn log_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let logs: Vec<(f64, f64)> = pts.iter().filter(|(_, v)| *v > 0.0).map(|(r, v)| (r.ln(), v.ln())).collect();
    (logs.len() >= 2).then(|| fit(&logs))
}

/// Fitted order of vanishing of `|Q(gl, gr)|_h` as `rho -> 0`.
pub fn vanishing_order(
    gl: &MetricField,
    gr: &MetricField,
    base: &MetricField,
    rhos: &[f64],
    ys: &[f64],
    fd: &FdScheme,
) -> Result<VanishingReport, ExpansionError> {
    let n = base.dim();
    let mut table = vec![vec![0.0; rhos.len()]; ys.len()];
    for (ri, &rho) in rhos.iter().enumerate() {
        let bg = background(base, n, rho, fd)?;
        let vals = ys
            .par_iter()
            .map(|&y| {
                let p = point(n, rho, y);
                let d = q_defect(gl, gr, base, &bg, &p, fd)?;
                Ok(norm_sq_with(&base.at(p.coords())?, &d)?.max(0.0).sqrt())
            })
            .collect::<Result<Vec<f64>, ExpansionError>>()?;
        for (yi, v) in vals.into_iter().enumerate() {
            table[yi][ri] = v;
        }
    }
    let sup: Vec<(f64, f64)> =
        rhos.iter().enumerate().map(|(ri, &r)| (r, table.iter().map(|row| row[ri]).fold(0.0, f64::max))).collect();
    let per_y = ys
        .iter()
        .zip(&table)
        .filter_map(|(&y, row)| {
            let pts: Vec<(f64, f64)> = rhos.iter().cloned().zip(row.iter().cloned()).collect();
            log_fit(&pts).map(|(slope, residual)| PerY { y, slope, residual })
        })
        .collect();
    let exact = sup.iter().all(|(_, v)| *v == 0.0);
    let (slope, residual) = if exact { (f64::INFINITY, 0.0) } else { log_fit(&sup).unwrap_or((f64::NAN, f64::NAN)) };
    Ok(VanishingReport { slope, residual, sup, per_y, exact })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    /// Exponent of the term added at this stage.
    pub exponent: f64,
    pub correction: Option<CorrectionReport>,
    pub vanishing: VanishingReport,
    pub threshold: f64,
    /// `max |gauge term of Q(g_j, g_j)|_h` over the samples.
    pub gauge_max: f64,
    pub gauge_tol: f64,
    /// `max |rho^2 g_j - (hhat + qhat)|` on the tangential block at the
    /// smallest sampled `rho`, divided by that `rho`.
    pub fidelity: f64,
    /// All coefficients vanish at sampled `y1` outside the support of `psi`.
    pub local: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub n: usize,
    pub qhat_sup_norm: f64,
    pub rhos: Vec<f64>,
    pub ys: Vec<f64>,
    pub stages: Vec<StageReport>,
    pub monotone: bool,
    pub pass: bool,
}

/// Slope threshold for stage `j`.
pub fn stage_threshold(j: usize) -> f64 {
    match j {
        1 => 0.9,
        2 => 1.85,
        3 => 2.7,
        _ => j as f64 - 0.3,
    }
}

/// `y1` samples inside the support of `qhat`, or `[0]` for zero data.
pub fn default_y_samples(bd: &BoundaryData, count: usize) -> Vec<f64> {
    match bd.qhat.support() {
        Some((lo, hi)) => (1..=count).map(|k| lo + (hi - lo) * k as f64 / (count + 1) as f64).collect(),
        None => vec![0.0],
    }
}

/// Radii `2^-2 .. 2^-7` of the vanishing-order fit.
pub fn default_rho_samples() -> Vec<f64> {
    (2..=7).map(|k| 2f64.powi(-k)).collect()
}

fn stage_report(
    g: &ExpansionMetric,
    g1: &ExpansionMetric,
    correction: Option<CorrectionReport>,
    rhos: &[f64],
    ys: &[f64],
    opts: &ExpansionOptions,
) -> Result<StageReport, ExpansionError> {
    let n = g.bd.n;
    let (gm, g1m, h) = (g.metric(), g1.metric(), g.hyperbolic());
    let vanishing = vanishing_order(&gm, &g1m, &h, rhos, ys, &opts.fd)?;
    let mut gauge_max = 0.0f64;
    for &rho in rhos {
        for &y in ys {
            let p = point(n, rho, y);
            let gt = gauge_term_at(&gm, &gm, &p, &opts.fd)?;
            gauge_max = gauge_max.max(norm_sq_with(&h.at(p.coords())?, &gt)?.max(0.0).sqrt());
        }
    }
    let rho_min = rhos.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut fidelity = 0.0f64;
    for &y in ys {
        let g_bar = g.at(point(n, rho_min, y).coords()) * (rho_min * rho_min);
        let tangential = g_bar.view((1, 1), (n - 1, n - 1)).clone_owned();
        fidelity = fidelity.max((tangential - g.bd.boundary_metric(y)).amax() / rho_min);
    }
    let outside = [-(g.bd.psi_outer + 0.02), g.bd.psi_outer + 0.02];
    let local = outside.iter().all(|&y| g.terms.iter().all(|t| g.coefficient_at(t, y).amax() == 0.0));
    let threshold = stage_threshold(g.stage);
    let gauge_tol = 10.0 * opts.fd.step * opts.fd.step;
    let pass = (vanishing.exact || vanishing.slope >= threshold) && gauge_max <= gauge_tol && local;
    Ok(StageReport {
        stage: g.stage,
        exponent: g.terms.last().map_or(-2.0, |t| t.exponent),
        correction,
        vanishing,
        threshold,
        gauge_max,
        gauge_tol,
        fidelity,
        local,
        pass,
    })
}

/// Builds `g_1 .. g_stages` and reports the vanishing order after each stage.
/// Stops early with an error at a characteristic exponent.
pub fn expansion_ladder(bd: &BoundaryData, stages: usize, opts: &ExpansionOptions) -> Result<LadderReport, ExpansionError> {
    let g1 = ExpansionMetric::first(bd)?;
    let rhos = default_rho_samples();
    let ys = default_y_samples(bd, 7);
    let mut reports = vec![stage_report(&g1, &g1, None, &rhos, &ys, opts)?];
    let mut g = g1.clone();
    for _ in 1..stages {
        let (next, corr) = correction_step(&g, &g1, opts)?;
        reports.push(stage_report(&next, &g1, Some(corr), &rhos, &ys, opts)?);
        g = next;
    }
    let slopes: Vec<f64> = reports.iter().map(|r| r.vanishing.slope).collect();
    let monotone = slopes.windows(2).all(|w| w[1] >= w[0] - 0.1);
    let pass = monotone && reports.iter().all(|r| r.pass);
    Ok(LadderReport { n: bd.n, qhat_sup_norm: bd.qhat.sup_norm(), rhos, ys, stages: reports, monotone, pass })
}
