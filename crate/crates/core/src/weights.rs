//! Weight windows, barrier coefficients and indicial roots.

use crate::error::WeightError;
use serde::{Deserialize, Serialize};

/// Exponents of the weight `sigma^mu = rho^mu0 r_1^mu_1 .. r_k^mu_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub mu0: f64,
    pub mus: Vec<f64>,
    pub ranks: Vec<usize>,
    pub n: usize,
}

impl WeightVector {
    pub fn new(n: usize, mu0: f64, mus: Vec<f64>, ranks: Vec<usize>) -> Result<Self, WeightError> {
        let w = Self { mu0, mus, ranks, n };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), WeightError> {
        if self.mus.len() != self.ranks.len() {
            return Err(WeightError::InvalidWeights(format!(
                "{} cusp weights for {} ranks",
                self.mus.len(),
                self.ranks.len()
            )));
        }
        if let Some(f) = self.ranks.iter().find(|&&f| f < 1 || f + 1 > self.n) {
            return Err(WeightError::InvalidWeights(format!("rank {f} outside [1, {}]", self.n - 1)));
        }
        if !self.mu0.is_finite() || self.mus.iter().any(|m| !m.is_finite()) {
            return Err(WeightError::InvalidWeights("non-finite weight".into()));
        }
        Ok(())
    }
}

/// Open interval `(lo, hi)`; empty when `lo >= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const EMPTY: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// `mu0 > (n-1)/2` and `mu_j > -f_j/2`, all strict.
pub fn l2_cutoff_check(w: &WeightVector) -> bool {
    let half = (w.n as f64 - 1.0) / 2.0;
    w.mu0 > half && w.mus.iter().zip(&w.ranks).all(|(&m, &f)| m > -(f as f64) / 2.0)
}

/// Coefficients `(c_cos, c_sin)` of `(Delta + K)(r^mu cos^nu t0) = (c_cos cos^2 + c_sin sin^2) r^mu cos^nu t0`.
pub fn barrier_cusp(k: f64, mu: f64, nu: f64, f: usize, n: usize) -> Result<(f64, f64), WeightError> {
    if f < 1 || f + 2 > n {
        return Err(WeightError::InvalidWeights(format!(
            "intermediate rank needs 1 <= f <= n-2, got f = {f}, n = {n}"
        )));
    }
    let b = (n - 1 - f) as f64;
    let nm1 = n as f64 - 1.0;
    Ok((k - (mu * mu + f as f64 * mu - b * nu), k - nu * (nu - nm1)))
}

/// `K - mu (mu + n - 1)`.
pub fn barrier_maximal(k: f64, mu: f64, n: usize) -> f64 {
    k - mu * (mu + n as f64 - 1.0)
}

/// `K - nu (nu - (n - 1))`.
#[allow(non_snake_case)]
pub fn barrier_H0(k: f64, nu: f64, n: usize) -> f64 {
    k - nu * (nu - (n as f64 - 1.0))
}

/// Roots of `nu (nu - (n-1)) = K`, ascending.
pub fn indicial_roots(k: f64, n: usize) -> Result<(f64, f64), WeightError> {
    let nm1 = n as f64 - 1.0;
    let disc = nm1 * nm1 + 4.0 * k;
    if disc < 0.0 {
        return Err(WeightError::NoRealIndicialRoots(disc));
    }
    let s = disc.sqrt();
    Ok(((nm1 - s) / 2.0, (nm1 + s) / 2.0))
}

/// Weights `mu0 > (n-1)/2` with a positive `H_0` barrier.
pub fn mu0_window(n: usize, k: f64) -> Interval {
    let half = (n as f64 - 1.0) / 2.0;
    match indicial_roots(k, n) {
        Ok((lo, hi)) => {
            let iv = Interval { lo: lo.max(half), hi };
            if iv.is_empty() {
                Interval::EMPTY
            } else {
                iv
            }
        }
        Err(_) => Interval::EMPTY,
    }
}

/// `(0, mu*)` with `mu*` the positive root of `mu^2 + f mu = (n-1-f) mu0 + K`.
pub fn cusp_weight_window(n: usize, f: usize, mu0: f64, k: f64) -> Interval {
    if f < 1 || f + 2 > n {
        return Interval::EMPTY;
    }
    let c0 = (n - 1 - f) as f64 * mu0 + k;
    if c0 <= 0.0 {
        return Interval::EMPTY;
    }
    let fl = f as f64;
    Interval { lo: 0.0, hi: (-fl + (fl * fl + 4.0 * c0).sqrt()) / 2.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKind {
    H0,
    Cusp { index: usize, rank: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginParams {
    pub k: f64,
    pub mu: f64,
    pub nu: f64,
    pub f: usize,
    pub b: usize,
    pub n: usize,
}

/// Infimum of `(Delta + K) sigma^mu / sigma^mu` over one end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateMargin {
    pub delta: f64,
    pub end_kind: EndKind,
    pub params: MarginParams,
}

/// Margins of every end of `w` for the constant `k`.
pub fn estimate_margins(w: &WeightVector, k: f64) -> Result<Vec<EstimateMargin>, WeightError> {
    w.validate()?;
    let n = w.n;
    let mut out = vec![EstimateMargin {
        delta: barrier_H0(k, w.mu0, n),
        end_kind: EndKind::H0,
        params: MarginParams { k, mu: 0.0, nu: w.mu0, f: 0, b: n - 1, n },
    }];
    for (index, (&mu, &f)) in w.mus.iter().zip(&w.ranks).enumerate() {
        let delta = if f + 1 == n {
            barrier_maximal(k, mu, n)
        } else {
            let (c, s) = barrier_cusp(k, mu, w.mu0, f, n)?;
            c.min(s)
        };
        out.push(EstimateMargin {
            delta,
            end_kind: EndKind::Cusp { index, rank: f },
            params: MarginParams { k, mu, nu: w.mu0, f, b: n - 1 - f, n },
        });
    }
    Ok(out)
}

/// How the closed-form suggestion `mu_i = 1/(n-2)` fared at one cusp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCheck {
    pub index: usize,
    pub rank: usize,
    pub candidate: f64,
    pub window: Interval,
    pub inside: bool,
    pub chosen: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub n: usize,
    pub ranks: Vec<usize>,
    pub k: f64,
    pub mu0_window: Interval,
    pub mu0_closed_form_inside: bool,
    pub cusp_windows: Vec<Interval>,
    pub closed_form: Vec<ClosedFormCheck>,
    pub weights: WeightVector,
    pub margins: Vec<EstimateMargin>,
    /// Margins for `K = 2(n-1)`, the other block of the linearization.
    pub margins_trace_block: Vec<EstimateMargin>,
    pub l2_ok: bool,
    pub delta_min: f64,
    pub pass: bool,
}

pub const DEFAULT_DELTA_MIN: f64 = 1e-6;

/// Picks weights for `K = -2`.
///
/// `mu0 = n-2` when it lies strictly inside its window, else the window
/// midpoint; `mu_i = 1/(n-2)` when strictly inside the cusp window, else
/// half the window's upper end.
pub fn admissible_weights(n: usize, ranks: &[usize], delta_min: f64) -> Result<(WeightVector, AdmissibilityReport), WeightError> {
    let k = -2.0;
    for (index, &f) in ranks.iter().enumerate() {
        if f < 1 || f + 1 > n {
            return Err(WeightError::InvalidWeights(format!("rank {f} outside [1, {}]", n.saturating_sub(1))));
        }
        if f + 1 == n {
            return Err(WeightError::AdmissibilityObstruction {
                index,
                rank: f,
                n,
                reason: format!("maximal rank: K - mu(mu + n - 1) < 0 for every mu >= 0 (value {} at mu = 0)", k),
            });
        }
    }
    let w0 = mu0_window(n, k);
    if w0.is_empty() {
        return Err(WeightError::DimensionTooSmall(n));
    }
    let closed_mu0 = n as f64 - 2.0;
    let mu0_inside = w0.contains(closed_mu0);
    let mu0 = if mu0_inside { closed_mu0 } else { w0.midpoint() };

    let mut cusp_windows = Vec::with_capacity(ranks.len());
    let mut closed_form = Vec::with_capacity(ranks.len());
    let mut mus = Vec::with_capacity(ranks.len());
    for (index, &f) in ranks.iter().enumerate() {
        let win = cusp_weight_window(n, f, mu0, k);
        if win.is_empty() {
            return Err(WeightError::AdmissibilityObstruction {
                index,
                rank: f,
                n,
                reason: format!(
                    "cusp window empty: (n-1-f) mu0 + K = {} <= 0 for mu0 = {mu0}",
                    (n - 1 - f) as f64 * mu0 + k
                ),
            });
        }
        let candidate = 1.0 / (n as f64 - 2.0);
        let inside = win.contains(candidate);
        let chosen = if inside { candidate } else { win.hi / 2.0 };
        cusp_windows.push(win);
        closed_form.push(ClosedFormCheck { index, rank: f, candidate, window: win, inside, chosen });
        mus.push(chosen);
    }
    let weights = WeightVector::new(n, mu0, mus, ranks.to_vec())?;
    let margins = estimate_margins(&weights, k)?;
    let margins_trace_block = estimate_margins(&weights, 2.0 * (n as f64 - 1.0))?;
    let l2_ok = l2_cutoff_check(&weights);
    let pass = l2_ok && margins.iter().all(|m| m.delta >= delta_min);
    let report = AdmissibilityReport {
        n,
        ranks: ranks.to_vec(),
        k,
        mu0_window: w0,
        mu0_closed_form_inside: mu0_inside,
        cusp_windows,
        closed_form,
        weights: weights.clone(),
        margins,
        margins_trace_block,
        l2_ok,
        delta_min,
        pass,
    };
    Ok((weights, report))
}
