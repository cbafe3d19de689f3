use crate::charts::{BoundaryMetric, Chart};
use crate::error::ExpansionError;
use crate::smooth::{bump, plateau};
use crate::tensorcalc::MetricField;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Tangential boundary perturbation `qhat(y1)`: component `(a, b)` is
/// `scale * amp_ab * bump((y1 - c_ab) / radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QHat {
    /// Boundary dimension `n - 1`.
    pub dim: usize,
    pub scale: f64,
    pub radius: f64,
    /// Upper-triangular entries, row by row.
    pub amps: Vec<f64>,
    pub centers: Vec<f64>,
}

impl QHat {
    pub fn zero(dim: usize) -> Self {
        let m = dim * (dim + 1) / 2;
        Self { dim, scale: 0.0, radius: 0.45, amps: vec![0.0; m], centers: vec![0.0; m] }
    }

    /// Random amplitudes with largest entry 1, so `||qhat||_inf = scale`.
    pub fn seeded(dim: usize, seed: u64, scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = dim * (dim + 1) / 2;
        let mut amps: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let top = amps.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        amps.iter_mut().for_each(|a| *a /= top);
        let centers = (0..m).map(|_| rng.random_range(-0.1..0.1)).collect();
        Self { dim, scale, radius: 0.45, amps, centers }
    }

    pub fn at(&self, y1: f64) -> DMatrix<f64> {
        let d = self.dim;
        let mut out = DMatrix::zeros(d, d);
        if self.scale == 0.0 {
            return out;
        }
        let mut c = 0;
        for i in 0..d {
            for j in i..d {
                let v = self.scale * self.amps[c] * bump((y1 - self.centers[c]) / self.radius);
                out[(i, j)] = v;
                out[(j, i)] = v;
                c += 1;
            }
        }
        out
    }

    /// Closed interval in `y1` outside which `qhat` vanishes; `None` for zero data.
    pub fn support(&self) -> Option<(f64, f64)> {
        let live: Vec<f64> =
            self.amps.iter().zip(&self.centers).filter(|(a, _)| **a != 0.0 && self.scale != 0.0).map(|(_, c)| *c).collect();
        if live.is_empty() {
            return None;
        }
        let lo = live.iter().cloned().fold(f64::INFINITY, f64::min) - self.radius;
        let hi = live.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + self.radius;
        Some((lo, hi))
    }

    pub fn sup_norm(&self) -> f64 {
        self.scale * self.amps.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

/// Collar patch `U = {|y1| < u_half}` with Euclidean conformal infinity,
/// the perturbation `qhat` and the cutoff `psi = chi(rho / delta) chi_U(y1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub n: usize,
    pub u_half: f64,
    pub delta: f64,
    /// `chi_U = 1` for `|y1| <= psi_inner`, `0` beyond `psi_outer`.
    pub psi_inner: f64,
    pub psi_outer: f64,
    pub qhat: QHat,
}

impl BoundaryData {
    pub fn new(n: usize, qhat: QHat) -> Result<Self, ExpansionError> {
        let bd = Self { n, u_half: 1.0, delta: 0.6, psi_inner: 0.7, psi_outer: 0.95, qhat };
        bd.validate()?;
        Ok(bd)
    }

    pub fn zero(n: usize) -> Result<Self, ExpansionError> {
        Self::new(n, QHat::zero(n.saturating_sub(1)))
    }

    pub fn seeded(n: usize, seed: u64, sup_norm: f64) -> Result<Self, ExpansionError> {
        Self::new(n, QHat::seeded(n.saturating_sub(1), seed, sup_norm))
    }

    pub fn validate(&self) -> Result<(), ExpansionError> {
        let bad = |m: String| Err(ExpansionError::InvalidBoundaryData(m));
        if self.n < 3 {
            return bad(format!("dimension {} < 3", self.n));
        }
        if self.qhat.dim + 1 != self.n {
            return bad(format!("qhat has dimension {}, boundary has {}", self.qhat.dim, self.n - 1));
        }
        if !(0.0 < self.psi_inner && self.psi_inner < self.psi_outer && self.psi_outer < self.u_half) {
            return bad("cutoff radii must satisfy 0 < inner < outer < u_half".into());
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta = {}", self.delta));
        }
        if let Some((lo, hi)) = self.qhat.support() {
            if lo <= -self.psi_inner || hi >= self.psi_inner {
                return bad(format!("qhat support [{lo}, {hi}] not inside the plateau of psi"));
            }
        }
        for k in 0..=200 {
            let y = -self.u_half + 2.0 * self.u_half * k as f64 / 200.0;
            let kmat = self.boundary_metric(y);
            if kmat.symmetric_eigen().eigenvalues.min() <= 0.0 {
                return bad(format!("boundary metric not positive at y1 = {y}"));
            }
        }
        Ok(())
    }

    pub fn chart(&self) -> Chart {
        Chart::collar(self.n, BoundaryMetric::Euclidean).expect("n >= 3")
    }

    /// `psi(rho, y1)`, equal to 1 for `rho <= delta / 2` on the plateau of `chi_U`.
    pub fn psi(&self, rho: f64, y1: f64) -> f64 {
        plateau(rho / self.delta, 0.5, 1.0) * plateau(y1.abs(), self.psi_inner, self.psi_outer)
    }

    /// `hhat + qhat` at `y1`.
    pub fn boundary_metric(&self, y1: f64) -> DMatrix<f64> {
        DMatrix::identity(self.n - 1, self.n - 1) + self.qhat.at(y1)
    }

    /// `qbar`: `qhat` in the tangential block, zero normal components.
    pub fn qbar(&self, y1: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        out.view_mut((1, 1), (self.n - 1, self.n - 1)).copy_from(&self.qhat.at(y1));
        out
    }
}

/// `E(g) = hbar + psi qbar` with `hbar = rho^2 h = d rho^2 + dy^2`.
pub fn extend(bd: &BoundaryData) -> Result<MetricField, ExpansionError> {
    bd.validate()?;
    let b = bd.clone();
    let n = bd.n;
    Ok(MetricField::new(Arc::new(bd.chart()), "E(g)", move |x| {
        DMatrix::identity(n, n) + b.qbar(x[1]) * b.psi(x[0], x[1])
    }))
}

/// `T(g) = rho^-2 E(g) = h + rho^-2 psi qbar`.
#[allow(non_snake_case)]
pub fn T_map(bd: &BoundaryData) -> Result<MetricField, ExpansionError> {
    let e = extend(bd)?;
    Ok(MetricField::new(Arc::new(bd.chart()), "T(g)", move |x| e.tensor().at_unchecked(x) / (x[0] * x[0])))
}
