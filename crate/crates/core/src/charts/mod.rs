//! Model coordinate charts of a geometrically finite hyperbolic manifold.
//!
//! Four chart families are provided:
//!
//! * [`ChartKind::IntermediateCusp`]: blown-up cusp of rank `1 <= f <= n-2`
//!   in coordinates `(r, theta0, theta_alpha.., w..)` with
//!   `h = dr^2/(r^2 cos^2 theta0) + (dtheta0^2 + sin^2 theta0 dtheta_alpha^2)/cos^2 theta0
//!   + r^2/cos^2 theta0 dw^2`.
//! * [`ChartKind::MaximalCusp`]: `h = dr^2/r^2 + r^2 g_N` with `g_N` flat.
//! * [`ChartKind::Collar`]: `h = (drho^2 + h_U(rho))/rho^2` near the regular
//!   boundary face.
//! * [`ChartKind::UpperHalfSpace`]: the cusp before blow-up,
//!   `h = (du^2 + |dv|^2 + (u^2 + |v|^2)^2 |dz|^2)/u^2`.
//!
//! The periodic directions of a cusp are modelled by translation invariance
//! in `w` (resp. `z`); no quotient is ever formed.

mod rescale;

pub use rescale::{rescaled_metric_at, RescalingCase, RescalingKind};

use crate::config::KeyValues;
use crate::error::ChartError;
use crate::smooth::truncate_bdf;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartKind {
    IntermediateCusp,
    MaximalCusp,
    Collar,
    UpperHalfSpace,
}

impl ChartKind {
    pub fn parse(s: &str) -> Result<Self, ChartError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cusp" | "intermediate" | "intermediatecusp" | "intermediate_cusp" => {
                Ok(Self::IntermediateCusp)
            }
            "maximal" | "maximalcusp" | "maximal_cusp" => Ok(Self::MaximalCusp),
            "collar" => Ok(Self::Collar),
            "uhs" | "ball" | "upperhalfspace" | "upper_half_space" => Ok(Self::UpperHalfSpace),
            other => Err(ChartError::Config(format!("unknown chart kind `{other}`"))),
        }
    }
}

/// The boundary family `h_U(rho)` of the collar chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryMetric {
    /// `h_U(rho) = dy^2`: the upper half-space.
    Euclidean,
    /// `h_U(rho) = (1 - rho^2/4)^2 g_round` in nested spherical angles: the
    /// ball model written with a special boundary defining function.
    RoundSphere,
}

impl BoundaryMetric {
    pub fn parse(s: &str) -> Result<Self, ChartError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "flat" => Ok(Self::Euclidean),
            "round" | "sphere" | "roundsphere" => Ok(Self::RoundSphere),
            other => Err(ChartError::Config(format!("unknown h_U choice `{other}`"))),
        }
    }

    /// Diagonal of `h_U(rho)` at boundary coordinates `y`.
    pub fn diagonal(self, rho: f64, y: &[f64]) -> Vec<f64> {
        match self {
            BoundaryMetric::Euclidean => vec![1.0; y.len()],
            BoundaryMetric::RoundSphere => {
                let warp = (1.0 - rho * rho / 4.0).powi(2);
                round_sphere_diagonal(y).into_iter().map(|g| warp * g).collect()
            }
        }
    }
}

/// Diagonal of the round metric on `S^m` in nested angles
/// `da1^2 + sin^2 a1 da2^2 + sin^2 a1 sin^2 a2 da3^2 + ...`.
pub fn round_sphere_diagonal(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    let mut factor = 1.0;
    for &a in angles {
        out.push(factor);
        factor *= a.sin().powi(2);
    }
    out
}

/// Smooth truncation of the boundary defining functions to 1 away from
/// their tubular neighbourhoods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Width of the cusp neighbourhood in `r`.
    pub cusp_width: f64,
    /// Width of the `H_0` neighbourhood in `rho`.
    pub collar_width: f64,
    /// Fraction of each width over which the value blends to 1.
    pub transition: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { cusp_width: 1.0, collar_width: 1.0, transition: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub kind: ChartKind,
    pub n: usize,
    /// Cusp rank; the dimension of the periodic directions.
    pub f: usize,
    pub ranges: Vec<(f64, f64)>,
    pub h_u: BoundaryMetric,
    /// Points with an angular coordinate closer than this to a coordinate
    /// pole of the spherical factors are rejected.
    pub pole_margin: f64,
    pub truncation: Truncation,
}

/// A point in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint(pub Vec<f64>);

impl ChartPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Self(coords.into())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ChartPoint {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

const WIDE: (f64, f64) = (-50.0, 50.0);
const DEFAULT_POLE_MARGIN: f64 = 1e-3;

impl Chart {
    pub fn intermediate_cusp(n: usize, f: usize) -> Result<Self, ChartError> {
        if n < 3 || f < 1 || f + 2 > n {
            return Err(ChartError::InvalidChart(format!(
                "intermediate cusp needs 1 <= f <= n-2, got n = {n}, f = {f}"
            )));
        }
        let b = n - 1 - f;
        let mut ranges = vec![(0.0, 8.0), (0.0, FRAC_PI_2)];
        ranges.extend(sphere_ranges(b - 1));
        ranges.extend(std::iter::repeat_n(WIDE, f));
        Ok(Self::build(ChartKind::IntermediateCusp, n, f, ranges, BoundaryMetric::Euclidean))
    }

    pub fn maximal_cusp(n: usize) -> Result<Self, ChartError> {
        if n < 2 {
            return Err(ChartError::InvalidChart(format!("dimension {n} < 2")));
        }
        let mut ranges = vec![(0.0, 8.0)];
        ranges.extend(std::iter::repeat_n(WIDE, n - 1));
        Ok(Self::build(ChartKind::MaximalCusp, n, n - 1, ranges, BoundaryMetric::Euclidean))
    }

    pub fn collar(n: usize, h_u: BoundaryMetric) -> Result<Self, ChartError> {
        if n < 2 {
            return Err(ChartError::InvalidChart(format!("dimension {n} < 2")));
        }
        let mut ranges = Vec::with_capacity(n);
        match h_u {
            BoundaryMetric::Euclidean => {
                ranges.push((0.0, 8.0));
                ranges.extend(std::iter::repeat_n(WIDE, n - 1));
            }
            BoundaryMetric::RoundSphere => {
                ranges.push((0.0, 2.0));
                ranges.extend(sphere_ranges(n - 1));
            }
        }
        Ok(Self::build(ChartKind::Collar, n, 0, ranges, h_u))
    }

    /// Pre-blow-up cusp coordinates `(u, v, z)` with `f` periodic directions.
    pub fn upper_half_space(n: usize, f: usize) -> Result<Self, ChartError> {
        if n < 2 || f + 1 > n {
            return Err(ChartError::InvalidChart(format!(
                "upper half-space needs f <= n-1, got n = {n}, f = {f}"
            )));
        }
        let mut ranges = vec![(0.0, 8.0)];
        ranges.extend(std::iter::repeat_n(WIDE, n - 1));
        Ok(Self::build(ChartKind::UpperHalfSpace, n, f, ranges, BoundaryMetric::Euclidean))
    }

    fn build(kind: ChartKind, n: usize, f: usize, ranges: Vec<(f64, f64)>, h_u: BoundaryMetric) -> Self {
        Self {
            kind,
            n,
            f,
            ranges,
            h_u,
            pole_margin: DEFAULT_POLE_MARGIN,
            truncation: Truncation::default(),
        }
    }

    /// Builds a chart from `kind`, `n`, `f`, `h_u`, `ranges`, `pole_margin`
    /// and the truncation keys. `ranges` is a `;`-separated list of `lo:hi`.
    pub fn from_config(kv: &KeyValues) -> Result<Self, ChartError> {
        let cfg = |e: String| ChartError::Config(e);
        let kind = ChartKind::parse(kv.get("kind").unwrap_or("cusp"))?;
        let n = kv.get_usize("n").map_err(cfg)?.unwrap_or(4);
        let h_u = kv.get("h_u").map(BoundaryMetric::parse).transpose()?;
        let mut chart = match kind {
            ChartKind::IntermediateCusp => {
                Chart::intermediate_cusp(n, kv.get_usize("f").map_err(cfg)?.unwrap_or(1))?
            }
            ChartKind::MaximalCusp => Chart::maximal_cusp(n)?,
            ChartKind::Collar => Chart::collar(n, h_u.unwrap_or(BoundaryMetric::Euclidean))?,
            ChartKind::UpperHalfSpace => {
                Chart::upper_half_space(n, kv.get_usize("f").map_err(cfg)?.unwrap_or(1))?
            }
        };
        if let Some(text) = kv.get("ranges") {
            let parsed = parse_ranges(text)?;
            if parsed.len() != n {
                return Err(ChartError::Config(format!(
                    "ranges lists {} intervals, chart has {n} coordinates",
                    parsed.len()
                )));
            }
            chart.ranges = parsed;
        }
        if let Some(m) = kv.get_f64("pole_margin").map_err(cfg)? {
            chart.pole_margin = m;
        }
        if let Some(w) = kv.get_f64("cusp_width").map_err(cfg)? {
            chart.truncation.cusp_width = w;
        }
        if let Some(w) = kv.get_f64("collar_width").map_err(cfg)? {
            chart.truncation.collar_width = w;
        }
        if let Some(t) = kv.get_f64("transition").map_err(cfg)? {
            chart.truncation.transition = t;
        }
        chart.validate()?;
        Ok(chart)
    }

    pub fn validate(&self) -> Result<(), ChartError> {
        if self.ranges.len() != self.n {
            return Err(ChartError::InvalidChart("range count differs from n".into()));
        }
        if self.ranges.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(ChartError::InvalidChart("empty coordinate range".into()));
        }
        match self.kind {
            ChartKind::IntermediateCusp if self.f < 1 || self.f + 2 > self.n => Err(
                ChartError::InvalidChart("intermediate cusp needs 1 <= f <= n-2".into()),
            ),
            ChartKind::MaximalCusp if self.f + 1 != self.n => {
                Err(ChartError::InvalidChart("maximal cusp needs f = n-1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Transverse sphere dimension `b = n - 1 - f` of a cusp chart.
    pub fn b(&self) -> usize {
        self.n - 1 - self.f
    }

    /// Indices of coordinates that are spherical angles (pole-excluded).
    fn angle_indices(&self) -> std::ops::Range<usize> {
        match self.kind {
            ChartKind::IntermediateCusp => 1..(1 + self.b()),
            ChartKind::Collar if self.h_u == BoundaryMetric::RoundSphere => 1..self.n,
            _ => 0..0,
        }
    }

    /// Index of the last nested angle of a sphere factor, which is periodic
    /// and so carries no pole.
    fn periodic_angle(&self) -> Option<usize> {
        let r = self.angle_indices();
        if r.is_empty() {
            None
        } else {
            match self.kind {
                // theta0 is never the periodic one: it is the polar distance.
                ChartKind::IntermediateCusp if self.b() == 1 => None,
                _ => Some(r.end - 1),
            }
        }
    }

    /// Range, degeneracy and pole checks.
    pub fn check_point(&self, p: &ChartPoint) -> Result<(), ChartError> {
        let x = p.coords();
        if x.len() != self.n {
            return Err(ChartError::WrongDimension { expected: self.n, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ChartError::Degenerate("non-finite coordinate"));
        }
        match self.kind {
            ChartKind::IntermediateCusp => {
                if x[0] == 0.0 {
                    return Err(ChartError::Degenerate("r = 0"));
                }
                if x[1].cos() <= 1e-12 {
                    return Err(ChartError::Degenerate("theta0 = pi/2"));
                }
            }
            ChartKind::MaximalCusp if x[0] == 0.0 => return Err(ChartError::Degenerate("r = 0")),
            ChartKind::Collar if x[0] == 0.0 => return Err(ChartError::Degenerate("rho = 0")),
            ChartKind::UpperHalfSpace if x[0] == 0.0 => {
                return Err(ChartError::Degenerate("u = 0"))
            }
            _ => {}
        }
        let periodic = self.periodic_angle();
        for i in self.angle_indices() {
            if Some(i) == periodic {
                continue;
            }
            let lower_gap = x[i];
            let upper_gap = if self.kind == ChartKind::IntermediateCusp && i == 1 {
                f64::INFINITY
            } else {
                PI - x[i]
            };
            if lower_gap < self.pole_margin || upper_gap < self.pole_margin {
                return Err(ChartError::PoleExcluded { index: i, value: x[i], margin: self.pole_margin });
            }
        }
        for (i, (&v, &(lo, hi))) in x.iter().zip(&self.ranges).enumerate() {
            if !(v > lo && v < hi) {
                return Err(ChartError::OutOfRange { index: i, value: v, lo, hi });
            }
        }
        Ok(())
    }

    /// Diagonal of the metric without any checks. All four families are
    /// diagonal in their coordinates.
    pub fn metric_diagonal_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        match self.kind {
            ChartKind::IntermediateCusp => {
                let (r, t0) = (x[0], x[1]);
                let c2 = t0.cos().powi(2);
                let s2 = t0.sin().powi(2);
                let b = self.b();
                let mut d = Vec::with_capacity(n);
                d.push(1.0 / (r * r * c2));
                d.push(1.0 / c2);
                for g in round_sphere_diagonal(&x[2..1 + b]) {
                    d.push(s2 * g / c2);
                }
                d.extend(std::iter::repeat_n(r * r / c2, self.f));
                d
            }
            ChartKind::MaximalCusp => {
                let r = x[0];
                let mut d = vec![1.0 / (r * r)];
                d.extend(std::iter::repeat_n(r * r, n - 1));
                d
            }
            ChartKind::Collar => {
                let rho = x[0];
                let inv = 1.0 / (rho * rho);
                let mut d = vec![inv];
                d.extend(self.h_u.diagonal(rho, &x[1..]).into_iter().map(|g| g * inv));
                d
            }
            ChartKind::UpperHalfSpace => {
                let u = x[0];
                let nv = n - 1 - self.f;
                let v2: f64 = x[1..1 + nv].iter().map(|v| v * v).sum();
                let inv = 1.0 / (u * u);
                let mut d = vec![inv; 1 + nv];
                d.extend(std::iter::repeat_n((u * u + v2).powi(2) * inv, self.f));
                d
            }
        }
    }

    /// Closed-form metric components at `p`.
    pub fn metric_at(&self, p: &ChartPoint) -> Result<DMatrix<f64>, ChartError> {
        self.check_point(p)?;
        Ok(DMatrix::from_diagonal(&self.metric_diagonal_unchecked(p.coords()).into()))
    }

    /// `sqrt(det h)` from the closed-form determinant of each family.
    pub fn volume_density_at(&self, p: &ChartPoint) -> Result<f64, ChartError> {
        self.check_point(p)?;
        let x = p.coords();
        let n = self.n as i32;
        Ok(match self.kind {
            ChartKind::IntermediateCusp => {
                let (r, t0) = (x[0], x[1]);
                let b = self.b() as i32;
                let sphere: f64 = round_sphere_diagonal(&x[2..1 + self.b()]).iter().product();
                r.powi(self.f as i32 - 1) * t0.sin().powi(b - 1) / t0.cos().powi(n) * sphere.sqrt()
            }
            ChartKind::MaximalCusp => x[0].powi(n - 2),
            ChartKind::Collar => {
                let hu: f64 = self.h_u.diagonal(x[0], &x[1..]).iter().product();
                x[0].powi(-n) * hu.sqrt()
            }
            ChartKind::UpperHalfSpace => {
                let u = x[0];
                let nv = self.n - 1 - self.f;
                let v2: f64 = x[1..1 + nv].iter().map(|v| v * v).sum();
                u.powi(-n) * (u * u + v2).powi(self.f as i32)
            }
        })
    }

    /// Total boundary defining function, truncated to 1 away from the
    /// boundary faces.
    pub fn sigma_at(&self, p: &ChartPoint) -> Result<f64, ChartError> {
        self.check_point(p)?;
        let x = p.coords();
        let t = self.truncation;
        let tr = |v: f64, w: f64| truncate_bdf(v, w, t.transition);
        Ok(match self.kind {
            ChartKind::IntermediateCusp => tr(x[0], t.cusp_width) * tr(x[1].cos(), t.collar_width),
            ChartKind::MaximalCusp => tr(x[0], t.cusp_width),
            ChartKind::Collar => tr(x[0], t.collar_width),
            ChartKind::UpperHalfSpace => {
                let nv = self.n - 1 - self.f;
                let r = (x[0] * x[0] + x[1..1 + nv].iter().map(|v| v * v).sum::<f64>()).sqrt();
                tr(r, t.cusp_width) * tr(x[0] / r, t.collar_width)
            }
        })
    }

    /// Membership in the exhaustion domain `{sigma >= eps}`.
    pub fn in_exhaustion(&self, p: &ChartPoint, eps: f64) -> Result<bool, ChartError> {
        if !(eps > 0.0) {
            return Err(ChartError::NonPositiveEps(eps));
        }
        Ok(self.sigma_at(p)? >= eps)
    }

    /// A point comfortably inside the chart, used as a default sample.
    pub fn reference_point(&self) -> ChartPoint {
        let mut x = vec![0.0; self.n];
        match self.kind {
            ChartKind::IntermediateCusp => {
                x[0] = 0.5;
                x[1] = 0.6;
                for v in x.iter_mut().take(1 + self.b()).skip(2) {
                    *v = 1.1;
                }
            }
            ChartKind::Collar if self.h_u == BoundaryMetric::RoundSphere => {
                x[0] = 0.3;
                for v in x.iter_mut().skip(1) {
                    *v = 1.2;
                }
            }
            _ => x[0] = 0.5,
        }
        ChartPoint(x)
    }
}

fn sphere_ranges(dim: usize) -> Vec<(f64, f64)> {
    // Nested angles a1..a_{dim-1} in (0, pi); the last one is periodic.
    let mut r = vec![(0.0, PI); dim.saturating_sub(1)];
    if dim > 0 {
        r.push(WIDE);
    }
    r
}

fn parse_ranges(text: &str) -> Result<Vec<(f64, f64)>, ChartError> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (lo, hi) = s
                .split_once(':')
                .ok_or_else(|| ChartError::Config(format!("range `{s}` is not lo:hi")))?;
            let lo = lo.trim().parse::<f64>().map_err(|e| ChartError::Config(e.to_string()))?;
            let hi = hi.trim().parse::<f64>().map_err(|e| ChartError::Config(e.to_string()))?;
            Ok((lo, hi))
        })
        .collect()
}
