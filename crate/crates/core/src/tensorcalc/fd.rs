use crate::error::TensorError;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::ops::{Index, IndexMut};

/// Central-difference scheme.
///
/// Per-coordinate steps are `step / sqrt(g_ii(p))`, i.e. roughly `step` in
/// metric length, fixed once at the evaluation point and reused for every
/// nested stencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdScheme {
    pub step: f64,
    /// 2 or 4.
    pub order: usize,
    pub metric_scaled: bool,
}

impl Default for FdScheme {
    fn default() -> Self {
        Self { step: 1e-3, order: 2, metric_scaled: true }
    }
}

impl From<f64> for FdScheme {
    fn from(step: f64) -> Self {
        Self { step, ..Self::default() }
    }
}

impl FdScheme {
    pub fn new(step: f64) -> Self {
        step.into()
    }

    pub fn fourth_order(step: f64) -> Self {
        Self { step, order: 4, metric_scaled: true }
    }

    pub fn unscaled(step: f64) -> Self {
        Self { step, order: 2, metric_scaled: false }
    }

    pub(crate) fn validate(&self) -> Result<(), TensorError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(TensorError::Mismatch(format!("finite-difference step must be positive, got {}", self.step)));
        }
        if self.order != 2 && self.order != 4 {
            return Err(TensorError::Mismatch(format!("finite-difference order must be 2 or 4, got {}", self.order)));
        }
        Ok(())
    }

    /// Coordinate steps at a point where the metric is `g`.
    pub(crate) fn steps(&self, g: &DMatrix<f64>) -> Result<Vec<f64>, TensorError> {
        self.validate()?;
        (0..g.nrows())
            .map(|i| {
                let gii = g[(i, i)];
                if !(gii > 0.0) {
                    return Err(TensorError::SingularMetric);
                }
                Ok(if self.metric_scaled { self.step / gii.sqrt() } else { self.step })
            })
            .collect()
    }

    fn stencil(&self) -> &'static [(f64, f64)] {
        const O2: [(f64, f64); 2] = [(-1.0, -0.5), (1.0, 0.5)];
        const O4: [(f64, f64); 4] =
            [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
        if self.order == 4 {
            &O4
        } else {
            &O2
        }
    }

    /// `d/dx_i` of `f` at `x` with coordinate step `h`.
    pub(crate) fn partial<T: FdValue>(
        &self,
        f: &dyn Fn(&[f64]) -> Result<T, TensorError>,
        x: &[f64],
        i: usize,
        h: f64,
    ) -> Result<T, TensorError> {
        let mut y = x.to_vec();
        let mut vals = Vec::with_capacity(4);
        for &(k, w) in self.stencil() {
            y[i] = x[i] + k * h;
            vals.push((w / h, f(&y)?));
        }
        let terms: Vec<(f64, &T)> = vals.iter().map(|(w, v)| (*w, v)).collect();
        Ok(T::lin_comb(&terms))
    }

    /// All first partials `[d_0 f, .., d_{n-1} f]`.
    pub(crate) fn gradient<T: FdValue>(
        &self,
        f: &dyn Fn(&[f64]) -> Result<T, TensorError>,
        x: &[f64],
        hs: &[f64],
    ) -> Result<Vec<T>, TensorError> {
        hs.iter().enumerate().map(|(i, &h)| self.partial(f, x, i, h)).collect()
    }
}

/// Values that can be combined linearly by a stencil.
pub trait FdValue: Sized {
    fn lin_comb(terms: &[(f64, &Self)]) -> Self;
}

impl FdValue for f64 {
    fn lin_comb(terms: &[(f64, &Self)]) -> Self {
        terms.iter().map(|(w, v)| w * **v).sum()
    }
}

impl FdValue for DMatrix<f64> {
    fn lin_comb(terms: &[(f64, &Self)]) -> Self {
        let mut out = terms[0].1 * terms[0].0;
        for (w, v) in &terms[1..] {
            out += *v * *w;
        }
        out
    }
}

impl FdValue for DVector<f64> {
    fn lin_comb(terms: &[(f64, &Self)]) -> Self {
        let mut out = terms[0].1 * terms[0].0;
        for (w, v) in &terms[1..] {
            out.axpy(*w, v, 1.0);
        }
        out
    }
}

impl FdValue for Tensor3 {
    fn lin_comb(terms: &[(f64, &Self)]) -> Self {
        let mut out = Tensor3::zeros(terms[0].1.n);
        for (w, v) in terms {
            for (o, x) in out.data.iter_mut().zip(&v.data) {
                *o += w * x;
            }
        }
        out
    }
}

/// Dense rank-3 array `a[(i, j, k)]` over `n` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n] }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sub(&self, other: &Tensor3) -> Tensor3 {
        Tensor3 { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scaled(&self, c: f64) -> Tensor3 {
        Tensor3 { n: self.n, data: self.data.iter().map(|a| a * c).collect() }
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.data[(i * self.n + j) * self.n + k]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        &mut self.data[(i * self.n + j) * self.n + k]
    }
}

/// Dense rank-4 array.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }
}

impl Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = f64;
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &f64 {
        &self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }
}

impl IndexMut<(usize, usize, usize, usize)> for Tensor4 {
    fn index_mut(&mut self, (i, j, k, l): (usize, usize, usize, usize)) -> &mut f64 {
        &mut self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }
}
