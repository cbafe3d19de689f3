use pelab_core::tensorcalc::{laplacian_scalar_at, FdScheme, MetricField, ScalarField};
use pelab_core::weights::*;
use pelab_core::{BoundaryMetric, Chart, ChartPoint, WeightError};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

#[test]
fn l2_cutoff_examples() {
    let w = WeightVector::new(5, 3.0, vec![1.0 / 3.0, 1.0 / 3.0], vec![1, 2]).unwrap();
    assert!(l2_cutoff_check(&w));
    let w = WeightVector::new(4, 1.5, vec![0.2], vec![1]).unwrap();
    assert!(!l2_cutoff_check(&w));
    let w = WeightVector::new(4, 1.75, vec![-1.0], vec![2]).unwrap();
    assert!(!l2_cutoff_check(&w));
    assert!(WeightVector::new(4, 1.75, vec![0.1], vec![1, 2]).is_err());
    assert!(WeightVector::new(4, 1.75, vec![0.1], vec![4]).is_err());
}

#[test]
fn barrier_cusp_examples() {
    assert_eq!(barrier_cusp(-2.0, 0.0, 0.0, 1, 4).unwrap(), (-2.0, -2.0));
    let (c, s) = barrier_cusp(-2.0, 1.0 / 3.0, 3.0, 1, 5).unwrap();
    assert!((c - (-2.0 - (1.0 / 9.0 + 1.0 / 3.0 - 9.0))).abs() < TOL);
    assert!((c - 6.555_555_555_555_555).abs() < 1e-12);
    assert!((s - 1.0).abs() < TOL);
    for mu in [0.01, 0.3, 1.0] {
        for nu in [0.0, 1.0, 2.0] {
            let (c, _) = barrier_cusp(-2.0, mu, nu, 2, 4).unwrap();
            assert!(c <= -mu * mu - 2.0 * mu + TOL);
        }
    }
    assert!(barrier_cusp(-2.0, 0.1, 1.0, 3, 4).is_err());
}

#[test]
fn barrier_maximal_and_h0_examples() {
    assert_eq!(barrier_maximal(-2.0, 0.0, 4), -2.0);
    for n in 2..7 {
        for mu in [1e-3, 0.5, 2.0] {
            assert!(barrier_maximal(-2.0, mu, n) < -2.0);
        }
    }
    assert_eq!(barrier_maximal(6.0, 1.0, 4), 2.0);
    assert_eq!(barrier_H0(-2.0, 0.0, 4), -2.0);
    assert!((barrier_H0(-2.0, 1.5, 4) - 0.25).abs() < TOL);
    assert_eq!(barrier_H0(-2.0, 2.0, 4), 0.0);
}

#[test]
fn window_examples() {
    let w = mu0_window(4, -2.0);
    assert!((w.lo - 1.5).abs() < TOL && (w.hi - 2.0).abs() < TOL);
    let w = mu0_window(5, -2.0);
    assert!((w.lo - 2.0).abs() < TOL && (w.hi - (2.0 + 2f64.sqrt())).abs() < TOL);
    assert!(mu0_window(3, -2.0).is_empty());

    let c = cusp_weight_window(4, 1, 1.75, -2.0);
    assert!((c.hi - (-1.0 + 7f64.sqrt()) / 2.0).abs() < TOL && c.lo == 0.0);
    for mu0 in [1.51, 1.75, 1.99] {
        assert!(cusp_weight_window(4, 2, mu0, -2.0).is_empty());
    }
    let c = cusp_weight_window(5, 3, 3.0, -2.0);
    assert!((c.hi - (-3.0 + 13f64.sqrt()) / 2.0).abs() < TOL);
}

#[test]
fn indicial_root_examples() {
    assert_eq!(indicial_roots(-2.0, 4).unwrap(), (1.0, 2.0));
    assert_eq!(indicial_roots(0.0, 6).unwrap(), (0.0, 5.0));
    let (a, b) = indicial_roots(6.0, 4).unwrap();
    assert!((a - (3.0 - 33f64.sqrt()) / 2.0).abs() < TOL && (b - (3.0 + 33f64.sqrt()) / 2.0).abs() < TOL);
    assert!(matches!(indicial_roots(-3.0, 3), Err(WeightError::NoRealIndicialRoots(_))));
}

#[test]
fn admissible_weight_examples() {
    let (w, report) = admissible_weights(5, &[1, 2], DEFAULT_DELTA_MIN).unwrap();
    assert_eq!(w.mu0, 3.0);
    assert!(w.mus.iter().all(|&m| m > 0.0));
    assert!(report.pass && report.l2_ok);
    assert!(report.margins.iter().all(|m| m.delta > 0.0));
    assert!(report.margins_trace_block.iter().all(|m| m.delta > 0.0));

    match admissible_weights(4, &[2], DEFAULT_DELTA_MIN) {
        Err(WeightError::AdmissibilityObstruction { rank: 2, .. }) => {}
        other => panic!("{other:?}"),
    }
    match admissible_weights(4, &[3], DEFAULT_DELTA_MIN) {
        Err(WeightError::AdmissibilityObstruction { rank: 3, .. }) => {}
        other => panic!("{other:?}"),
    }
    assert_eq!(admissible_weights(3, &[1], DEFAULT_DELTA_MIN), Err(WeightError::DimensionTooSmall(3)));

    let (w, report) = admissible_weights(4, &[1, 1], DEFAULT_DELTA_MIN).unwrap();
    assert!(mu0_window(4, -2.0).contains(w.mu0));
    let bound = (-1.0 + (1.0 + 4.0 * (2.0 * w.mu0 - 2.0)).sqrt()) / 2.0;
    assert!(w.mus.iter().all(|&m| 0.0 < m && m < bound));
    assert!(report.pass);
}

#[test]
fn closed_form_cusp_weight_fails_for_rank_three_in_dimension_five() {
    let (w, report) = admissible_weights(5, &[3], DEFAULT_DELTA_MIN).unwrap();
    let check = &report.closed_form[0];
    assert!(!check.inside);
    assert!((1.0f64 / 9.0 + 1.0) > 1.0);
    assert_eq!(w.mus[0], check.window.hi / 2.0);
    assert!(report.pass);
}

fn cusp_point(n: usize, f: usize, r: f64, t0: f64) -> ChartPoint {
    let mut x = vec![0.0; n];
    x[0] = r;
    x[1] = t0;
    for v in x.iter_mut().take(n - f).skip(2) {
        *v = 1.0;
    }
    ChartPoint::new(x)
}

/// One random draw of the barrier check; returns the relative error
/// `|FD - closed form| / max(|closed form|, 1)`.
fn barrier_draw(rng: &mut ChaCha8Rng) -> f64 {
    let fd = FdScheme::default();
    let n = rng.random_range(4..=5usize);
    let k = if rng.random_bool(0.5) { -2.0 } else { 2.0 * (n as f64 - 1.0) };
    match rng.random_range(0..3) {
        0 => {
            let f = rng.random_range(1..=n - 2);
            let mu = rng.random_range(0.0..1.5);
            let nu = rng.random_range(0.0..3.0);
            let t0 = rng.random_range(0.1..1.3);
            let p = cusp_point(n, f, rng.random_range(0.2..2.0), t0);
            let h = MetricField::from_chart(Chart::intermediate_cusp(n, f).unwrap());
            let u = ScalarField::new("cusp barrier", move |x| x[0].powf(mu) * x[1].cos().powf(nu));
            let got = laplacian_scalar_at(&h, &u, &p, &fd).unwrap() / u.at(p.coords()) + k;
            let (c, s) = barrier_cusp(k, mu, nu, f, n).unwrap();
            let want = c * t0.cos().powi(2) + s * t0.sin().powi(2);
            (got - want).abs() / want.abs().max(1.0)
        }
        1 => {
            let mu = rng.random_range(0.0..2.0);
            let p = ChartPoint::new((0..n).map(|i| if i == 0 { rng.random_range(0.2..3.0) } else { 0.3 }).collect::<Vec<_>>());
            let h = MetricField::from_chart(Chart::maximal_cusp(n).unwrap());
            let u = ScalarField::new("r^mu", move |x| x[0].powf(mu));
            let got = laplacian_scalar_at(&h, &u, &p, &fd).unwrap() / u.at(p.coords()) + k;
            let want = barrier_maximal(k, mu, n);
            (got - want).abs() / want.abs().max(1.0)
        }
        _ => {
            let nu = rng.random_range(0.0..3.5);
            let p = ChartPoint::new((0..n).map(|i| if i == 0 { rng.random_range(0.05..1.0) } else { -0.2 }).collect::<Vec<_>>());
            let h = MetricField::from_chart(Chart::collar(n, BoundaryMetric::Euclidean).unwrap());
            let u = ScalarField::new("rho^nu", move |x| x[0].powf(nu));
            let got = laplacian_scalar_at(&h, &u, &p, &fd).unwrap() / u.at(p.coords()) + k;
            let want = barrier_H0(k, nu, n);
            (got - want).abs() / want.abs().max(1.0)
        }
    }
}

#[test]
fn barrier_closed_forms_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let worst = (0..60).map(|_| barrier_draw(&mut rng)).fold(0.0, f64::max);
    assert!(worst <= 1e-3, "{worst}");
}

#[test]
fn barrier_fd_converges_at_second_order() {
    let (n, f, mu, nu, t0) = (4, 1, 0.4, 1.75, 0.9);
    let p = cusp_point(n, f, 0.6, t0);
    let h = MetricField::from_chart(Chart::intermediate_cusp(n, f).unwrap());
    let u = ScalarField::new("cusp barrier", move |x| x[0].powf(mu) * x[1].cos().powf(nu));
    let (c, s) = barrier_cusp(-2.0, mu, nu, f, n).unwrap();
    let want = c * t0.cos().powi(2) + s * t0.sin().powi(2);
    let err = |step: f64| (laplacian_scalar_at(&h, &u, &p, &FdScheme::new(step)).unwrap() / u.at(p.coords()) - 2.0 - want).abs();
    let order = (err(4e-2) / err(2e-2)).log2();
    assert!(order >= 1.9, "{order}");
}

proptest! {
    #[test]
    fn h0_window_consistency(n in 4usize..9, t in 0.001f64..0.999) {
        let w = mu0_window(n, -2.0);
        let nu = w.lo + t * (w.hi - w.lo);
        prop_assert!(barrier_H0(-2.0, nu, n) > 0.0);
        prop_assert!(nu > (n as f64 - 1.0) / 2.0);
        prop_assert!(barrier_H0(-2.0, w.hi, n).abs() < 1e-12);
        prop_assert!((w.lo - (n as f64 - 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn maximal_rank_window_is_empty(n in 2usize..10, mu in 0.0f64..5.0, dmu in 1e-6f64..1.0) {
        prop_assert!(barrier_maximal(-2.0, mu, n) < 0.0);
        prop_assert!(barrier_maximal(-2.0, mu + dmu, n) < barrier_maximal(-2.0, mu, n));
        // mu^2 + (n-1) mu + 2 = 0 has no nonnegative root.
        let nm1 = n as f64 - 1.0;
        let disc = nm1 * nm1 - 8.0;
        prop_assert!(disc < 0.0 || (-nm1 + disc.sqrt()) / 2.0 < 0.0);
    }

    #[test]
    fn admissible_output_is_admissible(n in 4usize..9, raw in prop::collection::vec(1usize..8, 1..4)) {
        let ranks: Vec<usize> = raw.into_iter().map(|f| 1 + (f - 1) % (n - 2)).collect();
        match admissible_weights(n, &ranks, DEFAULT_DELTA_MIN) {
            Ok((w, report)) => {
                prop_assert!(l2_cutoff_check(&w));
                prop_assert!(report.margins.iter().all(|m| m.delta >= DEFAULT_DELTA_MIN));
                for (m, win) in w.mus.iter().zip(&report.cusp_windows) {
                    prop_assert!(win.contains(*m));
                }
            }
            Err(WeightError::AdmissibilityObstruction { rank, .. }) => {
                // Only rank n-2 with mu0 too small can obstruct.
                prop_assert!(cusp_weight_window(n, rank, mu0_window(n, -2.0).midpoint().max(n as f64 - 2.0), -2.0).is_empty()
                    || cusp_weight_window(n, rank, n as f64 - 2.0, -2.0).is_empty());
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
