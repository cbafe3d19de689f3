use crate::charts::{rescaled_metric_at, BoundaryMetric, RescalingCase};
use crate::error::ChartError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseFamily {
    /// `v0 = eps e_1` on a rank-1 cusp.
    NearAxis,
    /// `|v0| = 0.5` on a rank-1 cusp.
    OffAxis,
    /// Round-sphere collar.
    Collar,
}

impl CaseFamily {
    pub const ALL: [CaseFamily; 3] = [CaseFamily::NearAxis, CaseFamily::OffAxis, CaseFamily::Collar];
}

/// Representative case of a family at `eps` in dimension 3.
pub fn case_for(family: CaseFamily, eps: f64) -> RescalingCase {
    match family {
        CaseFamily::NearAxis => RescalingCase::near_axis(3, 1, vec![eps], eps),
        CaseFamily::OffAxis => RescalingCase::off_axis(3, 1, vec![0.5], eps),
        CaseFamily::Collar => RescalingCase::collar(3, vec![1.3, 0.4], eps, BoundaryMetric::RoundSphere),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchauderRow {
    pub family: CaseFamily,
    pub eps: f64,
    pub points: usize,
    pub min_eig: f64,
    pub max_eig: f64,
    /// Largest pointwise condition number over the lattice.
    pub max_cond: f64,
    /// Largest first difference of any coefficient between lattice neighbours,
    /// divided by the lattice spacing.
    pub max_coeff_derivative: f64,
}

/// Lattice `s in [0, 0.9]`, other coordinates in `[-0.9, 0.9]`, `per_axis`
/// values each, restricted to the open unit half-ball.
fn lattice(n: usize, per_axis: usize) -> (Vec<Vec<f64>>, Vec<Option<usize>>, Vec<f64>) {
    let steps: Vec<f64> = (0..n).map(|d| if d == 0 { 0.9 } else { 1.8 } / (per_axis - 1) as f64).collect();
    let total = per_axis.pow(n as u32);
    let mut pts = Vec::new();
    let mut slot = vec![None; total];
    for (flat, s) in slot.iter_mut().enumerate() {
        let mut rem = flat;
        let q: Vec<f64> = (0..n)
            .map(|d| {
                let k = rem % per_axis;
                rem /= per_axis;
                if d == 0 {
                    k as f64 * steps[0]
                } else {
                    -0.9 + k as f64 * steps[d]
                }
            })
            .collect();
        if q.iter().map(|v| v * v).sum::<f64>() < 1.0 {
            *s = Some(pts.len());
            pts.push(q);
        }
    }
    (pts, slot, steps)
}

pub fn schauder_coefficient_scan(
    family: CaseFamily,
    eps_list: &[f64],
    per_axis: usize,
) -> Result<Vec<SchauderRow>, ChartError> {
    let per_axis = per_axis.max(2);
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let case = case_for(family, eps);
        case.validate()?;
        let n = case.n;
        let (pts, slot, steps) = lattice(n, per_axis);
        let metrics = pts.iter().map(|q| rescaled_metric_at(&case, q)).collect::<Result<Vec<_>, _>>()?;
        let (mut lo, mut hi, mut cond, mut deriv) = (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
        for g in &metrics {
            let eig = g.clone().symmetric_eigen().eigenvalues;
            let (a, b) = (eig.min(), eig.max());
            lo = lo.min(a);
            hi = hi.max(b);
            cond = cond.max(b / a);
        }
        for (flat, s) in slot.iter().enumerate() {
            let Some(i) = s else { continue };
            let mut stride = 1;
            for h in &steps {
                let k = (flat / stride) % per_axis;
                if k + 1 < per_axis {
                    if let Some(j) = slot[flat + stride] {
                        deriv = deriv.max((&metrics[j] - &metrics[*i]).amax() / h);
                    }
                }
                stride *= per_axis;
            }
        }
        rows.push(SchauderRow {
            family,
            eps,
            points: pts.len(),
            min_eig: lo,
            max_eig: hi,
            max_cond: cond,
            max_coeff_derivative: deriv,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchauderUniformity {
    pub family: CaseFamily,
    pub median_cond: f64,
    /// `max |cond / median - 1|` over the eps list.
    pub max_rel_deviation: f64,
    pub pass: bool,
}

/// Spread of the condition numbers of a family against their median, with
/// the `< 5%` criterion.
pub fn schauder_uniformity(rows: &[SchauderRow]) -> Option<SchauderUniformity> {
    let family = rows.first()?.family;
    let mut c: Vec<f64> = rows.iter().map(|r| r.max_cond).collect();
    c.sort_by(f64::total_cmp);
    let m = c.len();
    let median = if m % 2 == 1 { c[m / 2] } else { 0.5 * (c[m / 2 - 1] + c[m / 2]) };
    let dev = c.iter().map(|v| (v / median - 1.0).abs()).fold(0.0, f64::max);
    Some(SchauderUniformity { family, median_cond: median, max_rel_deviation: dev, pass: dev < 0.05 })
}
