//! Rescaling maps that pull the hyperbolic metric back to the unit half-ball
//! `B+ = {(s, p, q) : s^2 + |p|^2 + |q|^2 < 1, s >= 0}` around a point of
//! `{sigma = eps}`.

use super::BoundaryMetric;
use crate::error::ChartError;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RescalingKind {
    /// `|v0| <= C eps`: `z` rescaled by `1/eps`.
    CuspNearAxis,
    /// `eps < |v0| < 1`: `z` rescaled by `eps/(eps^2 + |v0|^2)`.
    CuspOffAxis,
    /// Base point on `H_0` away from the cusps.
    CollarCase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescalingCase {
    pub kind: RescalingKind,
    pub n: usize,
    /// Cusp rank; unused for [`RescalingKind::CollarCase`].
    pub f: usize,
    /// Transverse base coordinates `v0` (length `n-1-f`, or `n-1` in the collar).
    pub v0: Vec<f64>,
    pub eps: f64,
    /// The constant `C` of the near-axis criterion.
    pub near_axis_const: f64,
    pub h_u: BoundaryMetric,
}

impl RescalingCase {
    pub fn near_axis(n: usize, f: usize, v0: Vec<f64>, eps: f64) -> Self {
        Self { kind: RescalingKind::CuspNearAxis, n, f, v0, eps, near_axis_const: 1.0, h_u: BoundaryMetric::Euclidean }
    }

    pub fn off_axis(n: usize, f: usize, v0: Vec<f64>, eps: f64) -> Self {
        Self { kind: RescalingKind::CuspOffAxis, ..Self::near_axis(n, f, v0, eps) }
    }

    pub fn collar(n: usize, v0: Vec<f64>, eps: f64, h_u: BoundaryMetric) -> Self {
        Self { kind: RescalingKind::CollarCase, n, f: 0, v0, eps, near_axis_const: 1.0, h_u }
    }

    /// Length of the `p` block.
    pub fn p_dim(&self) -> usize {
        match self.kind {
            RescalingKind::CollarCase => self.n - 1,
            _ => self.n - 1 - self.f,
        }
    }

    pub fn validate(&self) -> Result<(), ChartError> {
        let bad = |m: String| Err(ChartError::CaseInvariant(m));
        if !(self.eps > 0.0) {
            return Err(ChartError::NonPositiveEps(self.eps));
        }
        if self.kind != RescalingKind::CollarCase && (self.f < 1 || self.f + 1 > self.n) {
            return bad(format!("cusp rank {} invalid for n = {}", self.f, self.n));
        }
        if self.v0.len() != self.p_dim() {
            return bad(format!("v0 has length {}, expected {}", self.v0.len(), self.p_dim()));
        }
        let v = norm(&self.v0);
        match self.kind {
            RescalingKind::CuspNearAxis if v > self.near_axis_const * self.eps => {
                bad(format!("near-axis case needs |v0| <= {} eps, |v0| = {v}", self.near_axis_const))
            }
            RescalingKind::CuspOffAxis if !(self.eps < v && v < 1.0) => {
                bad(format!("off-axis case needs eps < |v0| < 1, |v0| = {v}, eps = {}", self.eps))
            }
            _ => Ok(()),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Pullback of the hyperbolic metric under the rescaling map of `case`,
/// evaluated at `q = (s, p.., q..)` in the reference half-ball.
pub fn rescaled_metric_at(case: &RescalingCase, q: &[f64]) -> Result<DMatrix<f64>, ChartError> {
    case.validate()?;
    if q.len() != case.n {
        return Err(ChartError::WrongDimension { expected: case.n, got: q.len() });
    }
    let s = q[0];
    if s < 0.0 || q.iter().map(|x| x * x).sum::<f64>() >= 1.0 {
        return Err(ChartError::OutsideHalfBall);
    }
    let np = case.p_dim();
    let p = &q[1..1 + np];
    let decay = (-2.0 * s).exp();
    let mut d = Vec::with_capacity(case.n);
    d.push(1.0);
    match case.kind {
        RescalingKind::CuspNearAxis | RescalingKind::CuspOffAxis => {
            d.extend(std::iter::repeat_n(decay, np));
            let eps = case.eps;
            // |v0/eps + p|^2 = |v0|^2/eps^2 + 2 (v0/eps).p + |p|^2
            let shifted: f64 = case.v0.iter().zip(p).map(|(v, pi)| (v / eps + pi).powi(2)).sum();
            let num = ((2.0 * s).exp() + shifted).powi(2);
            let coeff = match case.kind {
                RescalingKind::CuspNearAxis => decay * num,
                _ => {
                    let den = (1.0 + norm(&case.v0).powi(2) / (eps * eps)).powi(2);
                    decay * num / den
                }
            };
            d.extend(std::iter::repeat_n(coeff, case.f));
        }
        RescalingKind::CollarCase => {
            let rho = case.eps * s.exp();
            let y: Vec<f64> = case.v0.iter().zip(p).map(|(v, pi)| v + case.eps * pi).collect();
            d.extend(case.h_u.diagonal(rho, &y).into_iter().map(|g| decay * g));
        }
    }
    Ok(DMatrix::from_diagonal(&d.into()))
}
