use nalgebra::DMatrix;

/// Cubic spline on a uniform knot grid with zero slope at both ends,
/// identically zero outside the knot range.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampedSpline {
    lo: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl ClampedSpline {
    /// Knots `lo + i h` for `i < values.len()`.
    pub fn new(lo: f64, h: f64, values: Vec<f64>) -> Self {
        let k = values.len();
        assert!(k >= 2 && h > 0.0, "spline needs two knots and positive spacing");
        let y = values;
        // Second derivatives from the tridiagonal system, slopes 0 at both ends.
        let mut diag = vec![4.0; k];
        let mut rhs: Vec<f64> = (0..k)
            .map(|i| match i {
                0 => 6.0 / (h * h) * (y[1] - y[0]),
                _ if i == k - 1 => -6.0 / (h * h) * (y[k - 1] - y[k - 2]),
                _ => 6.0 / (h * h) * (y[i + 1] - 2.0 * y[i] + y[i - 1]),
            })
            .collect();
        diag[0] = 2.0;
        diag[k - 1] = 2.0;
        for i in 1..k {
            let w = 1.0 / diag[i - 1];
            diag[i] -= w;
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; k];
        m[k - 1] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            m[i] = (rhs[i] - m[i + 1]) / diag[i];
        }
        Self { lo, h, y, m }
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.h * (self.y.len() - 1) as f64
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi() {
            return if x == self.lo { self.y[0] } else if x == self.hi() { *self.y.last().unwrap() } else { 0.0 };
        }
        let h = self.h;
        let i = (((x - self.lo) / h).floor() as usize).min(self.y.len() - 2);
        let a = self.lo + i as f64 * h;
        let (t, u) = (x - a, a + h - x);
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        mi * u.powi(3) / (6.0 * h)
            + mj * t.powi(3) / (6.0 * h)
            + (self.y[i] / h - mi * h / 6.0) * u
            + (self.y[i + 1] / h - mj * h / 6.0) * t
    }
}

/// Componentwise [`ClampedSpline`] of a symmetric matrix function of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSpline {
    pub n: usize,
    comps: Vec<ClampedSpline>,
}

impl TensorSpline {
    pub fn new(lo: f64, h: f64, samples: &[DMatrix<f64>]) -> Self {
        let n = samples[0].nrows();
        let mut comps = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                comps.push(ClampedSpline::new(lo, h, samples.iter().map(|s| s[(i, j)]).collect()));
            }
        }
        Self { n, comps }
    }

    pub fn eval(&self, x: f64) -> DMatrix<f64> {
        let n = self.n;
        let mut out = DMatrix::zeros(n, n);
        let mut c = 0;
        for i in 0..n {
            for j in i..n {
                let v = self.comps[c].eval(x);
                out[(i, j)] = v;
                out[(j, i)] = v;
                c += 1;
            }
        }
        out
    }

    pub fn range(&self) -> (f64, f64) {
        (self.comps[0].lo, self.comps[0].hi())
    }
}
