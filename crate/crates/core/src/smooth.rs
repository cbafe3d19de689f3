//! Smooth cutoff profiles shared by the charts, the solver and the expansion.

/// `exp(-1/x)` for `x > 0`, zero otherwise.
fn flat_exp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// C-infinity step: 0 for `x <= 0`, 1 for `x >= 1`, monotone in between.
pub fn smooth_step(x: f64) -> f64 {
    let a = flat_exp(x);
    let b = flat_exp(1.0 - x);
    if a + b == 0.0 {
        return if x <= 0.0 { 0.0 } else { 1.0 };
    }
    a / (a + b)
}

/// Standard compactly supported bump on (-1, 1), normalized to 1 at 0.
pub fn bump(x: f64) -> f64 {
    let t = 1.0 - x * x;
    if t <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / t).exp()
    }
}

/// Cutoff equal to 1 on `[0, inner]` and 0 beyond `outer`.
pub fn plateau(x: f64, inner: f64, outer: f64) -> f64 {
    debug_assert!(outer > inner);
    1.0 - smooth_step((x - inner) / (outer - inner))
}

/// Replaces a boundary defining function `x` by a function equal to `x` on
/// `[0, (1 - transition) * width]` and identically 1 on `[width, inf)`.
pub fn truncate_bdf(x: f64, width: f64, transition: f64) -> f64 {
    let inner = (1.0 - transition) * width;
    let keep = plateau(x, inner, width);
    keep * x + (1.0 - keep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_limits() {
        assert_eq!(smooth_step(-0.5), 0.0);
        assert_eq!(smooth_step(1.5), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bump_support() {
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.2), 0.0);
        assert_eq!(bump(0.0), 1.0);
    }

    #[test]
    fn truncation_is_identity_near_zero_and_one_far_out() {
        assert_eq!(truncate_bdf(0.2, 1.0, 0.2), 0.2);
        assert_eq!(truncate_bdf(1.3, 1.0, 0.2), 1.0);
        let mut prev = 0.0;
        for k in 1..200 {
            let x = k as f64 * 0.01;
            let t = truncate_bdf(x, 1.0, 0.2);
            assert!(t >= prev);
            prev = t;
        }
    }
}
