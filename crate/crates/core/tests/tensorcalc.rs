use nalgebra::{DMatrix, DVector};
use pelab_core::tensorcalc::*;
use pelab_core::{BoundaryMetric, Chart, ChartPoint};
use proptest::prelude::*;
use std::sync::Arc;

fn hnorm(h: &DMatrix<f64>, t: &DMatrix<f64>) -> f64 {
    norm_sq_with(h, t).unwrap().sqrt()
}

fn hyperbolic_charts() -> Vec<Chart> {
    vec![
        Chart::intermediate_cusp(4, 1).unwrap(),
        Chart::intermediate_cusp(5, 2).unwrap(),
        Chart::intermediate_cusp(5, 1).unwrap(),
        Chart::maximal_cusp(4).unwrap(),
        Chart::collar(4, BoundaryMetric::Euclidean).unwrap(),
        Chart::collar(3, BoundaryMetric::RoundSphere).unwrap(),
        Chart::upper_half_space(4, 2).unwrap(),
    ]
}

fn flat(n: usize, c: f64) -> MetricField {
    let chart = Chart::upper_half_space(n, 0).unwrap();
    MetricField::new(chart, "flat", move |_| DMatrix::identity(n, n) * (c * c))
}

fn flat_point(n: usize) -> ChartPoint {
    let mut x = vec![0.3; n];
    x[0] = 1.0;
    ChartPoint::new(x)
}

/// A smooth symmetric perturbation of size about `amp` in the norm of `h`.
fn perturbation(h: &MetricField, amp: f64, phase: f64) -> SymTensorField {
    let hh = h.clone();
    let chart = Arc::new(h.chart().clone());
    SymTensorField::new(chart, "e", move |x| {
        let d = hh.tensor().at_unchecked(x);
        let n = x.len();
        DMatrix::from_fn(n, n, |i, j| {
            let s = (0.9 * (x[i] + x[j]) + 0.3 * (i + j) as f64 + 0.2 * (i * j) as f64 + phase).sin();
            amp * s * (d[(i, i)] * d[(j, j)]).sqrt() / n as f64
        })
    })
}

#[test]
fn christoffels_flat_and_collar() {
    let g = flat(3, 1.0);
    let gam = christoffels_at(&g, &flat_point(3), &FdScheme::default()).unwrap();
    assert!(gam.max_abs() < 1e-12);

    // h = (drho^2 + dy^2)/rho^2: Gamma^rho_rhorho = -1/rho.
    let chart = Chart::collar(2, BoundaryMetric::Euclidean).unwrap();
    let h = MetricField::from_chart(chart);
    let p = ChartPoint::new(vec![0.5, 0.1]);
    let gam = christoffels_at(&h, &p, &FdScheme::default()).unwrap();
    assert!((gam[(0, 0, 0)] + 2.0).abs() < 1e-5, "{}", gam[(0, 0, 0)]);
    // Gamma^rho_yy = 1/rho, Gamma^y_rhoy = -1/rho.
    assert!((gam[(0, 1, 1)] - 2.0).abs() < 1e-5);
    assert!((gam[(1, 0, 1)] + 2.0).abs() < 1e-5);
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                assert!((gam[(k, i, j)] - gam[(k, j, i)]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn hyperbolic_ricci_converges_at_second_order() {
    for chart in hyperbolic_charts() {
        let n = chart.n as f64;
        let p = chart.reference_point();
        let h = MetricField::from_chart(chart.clone());
        let h0 = h.at(p.coords()).unwrap();
        let err = |step: f64| {
            let ric = ricci_at(&h, &p, &FdScheme::new(step)).unwrap();
            hnorm(&h0, &(ric + &h0 * (n - 1.0)))
        };
        let (e1, e2) = (err(2e-2), err(1e-2));
        let small = err(1e-3);
        assert!(small < 5e-5, "{:?}: {small}", chart.kind);
        if e1 > 1e-10 {
            let order = (e1 / e2).log2();
            assert!(order > 1.8, "{:?}: order {order} ({e1}, {e2})", chart.kind);
        }
    }
}

#[test]
fn ricci_of_flat_metrics_vanishes() {
    for c in [1.0, 2.5] {
        let ric = ricci_at(&flat(4, c), &flat_point(4), &FdScheme::default()).unwrap();
        assert!(ric.amax() < 1e-9);
    }
}

#[test]
fn riemann_hyperbolic_sign() {
    let chart = Chart::intermediate_cusp(4, 1).unwrap();
    let p = chart.reference_point();
    let h = MetricField::from_chart(chart);
    let r = riemann_at(&h, &p, &FdScheme::default()).unwrap();
    let g = h.at(p.coords()).unwrap();
    let n = 4;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                for j in 0..n {
                    let want = -(g[(i, j)] * g[(k, l)] - g[(i, l)] * g[(k, j)]);
                    let scale = (g[(i, i)] * g[(j, j)] * g[(k, k)] * g[(l, l)]).sqrt();
                    worst = worst.max((r[(i, k, l, j)] - want).abs() / scale);
                }
            }
        }
    }
    assert!(worst < 1e-5, "{worst}");
}

#[test]
fn difference_tensor_examples() {
    let chart = Chart::collar(4, BoundaryMetric::Euclidean).unwrap();
    let p = ChartPoint::new(vec![0.5, 0.2, -0.3, 0.1]);
    let h = MetricField::from_chart(chart);
    let fd = FdScheme::default();

    assert!(difference_tensor_at(&h, &h, &p, &fd).unwrap().max_abs() < 1e-12);
    let a = difference_tensor_at(&h.scaled(2.25), &h, &p, &fd).unwrap();
    assert!(a.max_abs() < 1e-9, "{}", a.max_abs());

    let g = h.perturbed(&perturbation(&h, 0.1, 0.0));
    let a = difference_tensor_at(&g, &h, &p, &fd).unwrap();
    let want = christoffels_at(&h, &p, &fd).unwrap().sub(&christoffels_at(&g, &p, &fd).unwrap());
    assert!(a.sub(&want).max_abs() < 1e-5 * want.max_abs().max(1.0), "{}", a.sub(&want).max_abs());
    assert!(a.max_abs() > 1e-3);
}

#[test]
fn curvature_split_matches_direct_ricci() {
    for chart in [Chart::collar(4, BoundaryMetric::Euclidean).unwrap(), Chart::intermediate_cusp(4, 1).unwrap()] {
        let p = chart.reference_point();
        let h = MetricField::from_chart(chart);
        let g = h.perturbed(&perturbation(&h, 0.05, 0.4));
        let h0 = h.at(p.coords()).unwrap();
        let err = |step: f64| {
            let fd = FdScheme::new(step);
            let split = ricci_split_at(&g, &h, &p, &fd).unwrap();
            let direct = ricci_at(&g, &p, &fd).unwrap();
            hnorm(&h0, &(split - direct))
        };
        let (e1, e2) = (err(2e-2), err(1e-2));
        assert!(e2 < 1e-3, "{e2}");
        assert!(e1 < 1e-10 || (e1 / e2).log2() > 1.7, "{e1} {e2}");
    }
}

#[test]
fn scalar_laplacian_examples() {
    let g = flat(3, 1.0);
    let p = flat_point(3);
    let fd = FdScheme::default();
    let u = ScalarField::new("x0^2", |x| x[0] * x[0]);
    assert!((laplacian_scalar_at(&g, &u, &p, &fd).unwrap() + 2.0).abs() < 1e-6);
    let c = ScalarField::new("1", |_| 1.0);
    assert!(laplacian_scalar_at(&g, &c, &p, &fd).unwrap().abs() < 1e-9);
}

/// `(Delta + K)(r^mu cos^nu t0) / (r^mu cos^nu t0)` worked out by hand from
/// the divergence form in cusp coordinates.
fn cusp_barrier_oracle(k: f64, mu: f64, nu: f64, f: usize, n: usize, t0: f64) -> f64 {
    let b = (n - 1 - f) as f64;
    let (c2, s2) = (t0.cos().powi(2), t0.sin().powi(2));
    k - mu * (mu + f as f64) * c2 + nu * b * c2 - nu * (nu + 1.0 - n as f64) * s2
}

#[test]
fn scalar_laplacian_cusp_barrier() {
    for (n, f) in [(4, 1), (5, 2), (5, 1)] {
        let chart = Chart::intermediate_cusp(n, f).unwrap();
        let h = MetricField::from_chart(chart);
        for (mu, nu, t0) in [(0.4, 1.75, 0.6), (1.2, 0.3, 1.1), (0.05, 2.5, 0.2)] {
            let p = ChartPoint::new({
                let mut x = vec![0.0; n];
                x[0] = 0.7;
                x[1] = t0;
                for v in x.iter_mut().take(n - f).skip(2) {
                    *v = 1.0;
                }
                x
            });
            let u = ScalarField::new("barrier", move |x| x[0].powf(mu) * x[1].cos().powf(nu));
            let lap = laplacian_scalar_at(&h, &u, &p, &FdScheme::default()).unwrap();
            let want = cusp_barrier_oracle(-2.0, mu, nu, f, n, t0) + 2.0;
            let got = lap / u.at(p.coords());
            assert!((got - want).abs() < 1e-4 * want.abs().max(1.0), "n={n} f={f}: {got} vs {want}");
        }
    }
}

#[test]
fn rough_laplacian_examples() {
    let fd = FdScheme::default();
    let g = flat(3, 1.0);
    let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 3.0, 1.0, 0.0, 1.0, -1.0]);
    let t = SymTensorField::constant(Arc::new(g.chart().clone()), m);
    assert!(rough_laplacian_tensor_at(&g, &t, &flat_point(3), &fd).unwrap().amax() < 1e-9);

    for chart in [Chart::intermediate_cusp(4, 1).unwrap(), Chart::collar(3, BoundaryMetric::RoundSphere).unwrap()] {
        let p = chart.reference_point();
        let h = MetricField::from_chart(chart);
        let h0 = h.at(p.coords()).unwrap();
        let lap_h = rough_laplacian_tensor_at(&h, h.tensor(), &p, &fd).unwrap();
        assert!(hnorm(&h0, &lap_h) < 1e-6, "{}", hnorm(&h0, &lap_h));

        let phi = ScalarField::new("phi", |x| (0.7 * x[0]).sin() + x[1] * x[1]);
        let t = h.tensor().times(&phi);
        let got = rough_laplacian_tensor_at(&h, &t, &p, &fd).unwrap();
        let want = &h0 * laplacian_scalar_at(&h, &phi, &p, &fd).unwrap();
        assert!(hnorm(&h0, &(got - &want)) < 5e-5 * hnorm(&h0, &want).max(1.0));
    }
}

#[test]
fn lichnerowicz_general_matches_hyperbolic_form() {
    let fd = FdScheme::default();
    for chart in [Chart::intermediate_cusp(4, 1).unwrap(), Chart::collar(4, BoundaryMetric::Euclidean).unwrap()] {
        let n = chart.n as f64;
        let p = chart.reference_point();
        let h = MetricField::from_chart(chart);
        let h0 = h.at(p.coords()).unwrap();
        let u = perturbation(&h, 1.0, 0.2);
        let a = lichnerowicz_at(&h, &u, &p, &fd).unwrap();
        let b = lichnerowicz_hyperbolic_at(&h, &u, &p, &fd).unwrap();
        assert!(hnorm(&h0, &(&a - &b)) < 5e-5 * hnorm(&h0, &b).max(1.0), "{} {}", hnorm(&h0, &(&a - &b)), hnorm(&h0, &b));

        assert!(hnorm(&h0, &lichnerowicz_at(&h, h.tensor(), &p, &fd).unwrap()) < 1e-5);
        let zero = SymTensorField::zero(Arc::new(h.chart().clone()));
        assert_eq!(lichnerowicz_hyperbolic_at(&h, &zero, &p, &fd).unwrap().amax(), 0.0);

        // Trace-free part: Delta_L u0 = nabla* nabla u0 - 2n u0.
        let hh = h.clone();
        let uu = u.clone();
        let u0 = SymTensorField::new(Arc::new(h.chart().clone()), "u0", move |x| {
            let (hx, ux) = (hh.tensor().at_unchecked(x), uu.at_unchecked(x));
            let tr = trace_with(&hx, &ux).unwrap();
            ux - hx * (tr / n)
        });
        let got = lichnerowicz_at(&h, &u0, &p, &fd).unwrap();
        let want = rough_laplacian_tensor_at(&h, &u0, &p, &fd).unwrap() - u0.at(p.coords()).unwrap() * (2.0 * n);
        assert!(hnorm(&h0, &(got - &want)) < 5e-5 * hnorm(&h0, &want).max(1.0));
    }
}

#[test]
fn bianchi_examples() {
    let chart = Chart::intermediate_cusp(4, 1).unwrap();
    let p = chart.reference_point();
    let h = MetricField::from_chart(chart);
    let fd = FdScheme::default();
    let h0 = h.at(p.coords()).unwrap();

    let ops = bianchi_ops_at(&h, h.tensor(), &p, &fd).unwrap();
    assert!(hnorm(&h0, &(ops.g_tensor - &h0 * (1.0 - 2.0))) < 1e-12);
    assert!(ops.divergence.amax() < 1e-9);

    let tf = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { (h0[(i, i)] * h0[(j, j)]).sqrt() });
    assert!((g_operator(&h0, &tf).unwrap() - &tf).amax() < 1e-12);

    let zero = |_: &[f64]| DVector::zeros(4);
    assert_eq!(sym_cov_deriv_at(&h, &zero, &p, &fd).unwrap().amax(), 0.0);
}

#[test]
fn q_examples() {
    let fd = FdScheme::default();
    for chart in hyperbolic_charts() {
        let n = chart.n as f64;
        let p = chart.reference_point();
        let h = MetricField::from_chart(chart.clone());
        let h0 = h.at(p.coords()).unwrap();
        let q = Q_at(&h, &h, &p, &fd).unwrap();
        assert!(hnorm(&h0, &q) < 5e-5, "{:?}: {}", chart.kind, hnorm(&h0, &q));

        let c2 = 1.7f64;
        let g = h.scaled(c2);
        let q = Q_at(&g, &g, &p, &fd).unwrap();
        let direct = ricci_at(&g, &p, &fd).unwrap() + &h0 * ((n - 1.0) * c2);
        let want = &h0 * ((n - 1.0) * (c2 - 1.0));
        assert!(hnorm(&h0, &(&q - &want)) < 5e-5 * (n - 1.0), "{:?}", chart.kind);
        assert!(hnorm(&h0, &(&q - &direct)) < 1e-7 * (n - 1.0), "{}", hnorm(&h0, &(&q - &direct)));
    }
}

#[test]
fn q_consistency_on_perturbed_metrics() {
    let step = 1e-3;
    let fd = FdScheme::new(step);
    for chart in hyperbolic_charts() {
        let n = chart.n as f64;
        let p = chart.reference_point();
        let h = MetricField::from_chart(chart.clone());
        let g = h.perturbed(&perturbation(&h, 0.1, 1.0));
        let g0 = g.at(p.coords()).unwrap();
        let q = Q_at(&g, &g, &p, &fd).unwrap();
        let want = ricci_at(&g, &p, &fd).unwrap() + &g0 * (n - 1.0);
        let err = hnorm(&h.at(p.coords()).unwrap(), &(q - want));
        assert!(err <= 10.0 * step * step, "{:?}: {err}", chart.kind);
    }
}

#[test]
fn l_examples_and_linearity() {
    let fd = FdScheme::default();
    let chart = Chart::intermediate_cusp(4, 1).unwrap();
    let n = 4.0;
    let kp = default_k_pair(4);
    let p = chart.reference_point();
    let h = MetricField::from_chart(chart.clone());
    let h0 = h.at(p.coords()).unwrap();

    let r = h.tensor().scaled(0.3);
    let lr = L_at(&h, &r, kp, &p, &fd).unwrap();
    assert!(hnorm(&h0, &(lr - &h0 * ((n - 1.0) * 0.3))) < 1e-6);

    let zero = SymTensorField::zero(Arc::new(chart));
    assert_eq!(L_at(&h, &zero, kp, &p, &fd).unwrap().amax(), 0.0);

    let (r1, r2) = (perturbation(&h, 1.0, 0.0), perturbation(&h, 1.0, 2.0));
    let (a, b) = (0.7, -1.3);
    let lhs = L_at(&h, &r1.scaled(a).axpy(b, &r2), kp, &p, &fd).unwrap();
    let rhs = L_at(&h, &r1, kp, &p, &fd).unwrap() * a + L_at(&h, &r2, kp, &p, &fd).unwrap() * b;
    assert!(hnorm(&h0, &(lhs - rhs)) < 1e-10 * 1e3);
}

/// Central difference of `s -> Q(h + s r, h)` against `L r`.
fn l_consistency(chart: Chart) -> (Vec<f64>, Vec<f64>) {
    let fd = FdScheme::default();
    let p = chart.reference_point();
    let h = MetricField::from_chart(chart.clone());
    let h0 = h.at(p.coords()).unwrap();
    let r = perturbation(&h, 1.0, 0.5);
    let lr = L_at(&h, &r, default_k_pair(chart.n), &p, &fd).unwrap();
    let dq = |s: f64| {
        let plus = Q_at_with_base(&h.perturbed(&r.scaled(s)), &h, &h, &p, &fd).unwrap();
        let minus = Q_at_with_base(&h.perturbed(&r.scaled(-s)), &h, &h, &p, &fd).unwrap();
        (plus - minus) / (2.0 * s)
    };
    let rel = |s: f64| hnorm(&h0, &(dq(s) - &lr)) / hnorm(&h0, &lr);
    let small = vec![rel(1e-3), rel(1e-4)];
    let large = vec![rel(0.08), rel(0.04), rel(0.02)];
    (small, large)
}

#[test]
fn l_is_the_linearization_of_q() {
    for chart in [Chart::intermediate_cusp(4, 1).unwrap(), Chart::collar(4, BoundaryMetric::Euclidean).unwrap()] {
        let (small, large) = l_consistency(chart);
        for e in &small {
            assert!(*e < 1e-4, "{small:?}");
        }
        let o1 = (large[0] / large[1]).log2();
        let o2 = (large[1] / large[2]).log2();
        assert!(o1 >= 1.9 && o2 >= 1.9, "orders {o1} {o2} from {large:?}");
    }
}

/// Plain-loop re-implementation of `g tau^-1 delta_g G_g tau` with unscaled
/// central differences of fixed step.
fn deturck_oracle(g: &dyn Fn(&[f64]) -> DMatrix<f64>, tau: &dyn Fn(&[f64]) -> DMatrix<f64>, x: &[f64], h: f64) -> DVector<f64> {
    let n = x.len();
    let shift = |x: &[f64], i: usize, d: f64| {
        let mut y = x.to_vec();
        y[i] += d;
        y
    };
    let dmat = |f: &dyn Fn(&[f64]) -> DMatrix<f64>, x: &[f64], i: usize| (f(&shift(x, i, h)) - f(&shift(x, i, -h))) / (2.0 * h);
    let gi = g(x).try_inverse().unwrap();
    let big = |y: &[f64]| {
        let (gy, ty) = (g(y), tau(y));
        let tr = (gy.clone().try_inverse().unwrap() * &ty).trace();
        ty - gy * (0.5 * tr)
    };
    let b0 = big(x);
    let dg: Vec<DMatrix<f64>> = (0..n).map(|i| dmat(g, x, i)).collect();
    let db: Vec<DMatrix<f64>> = (0..n).map(|i| dmat(&big, x, i)).collect();
    let gamma = |k: usize, i: usize, j: usize| -> f64 {
        (0..n).map(|l| 0.5 * gi[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])).sum()
    };
    let mut div = DVector::zeros(n);
    for k in 0..n {
        let mut v = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut nab = db[i][(j, k)];
                for m in 0..n {
                    nab -= gamma(m, i, j) * b0[(m, k)] + gamma(m, i, k) * b0[(j, m)];
                }
                v += gi[(i, j)] * nab;
            }
        }
        div[k] = -v;
    }
    g(x) * tau(x).try_inverse().unwrap() * div
}

#[test]
fn deturck_field_examples() {
    let fd = FdScheme::default();
    let chart = Chart::collar(3, BoundaryMetric::Euclidean).unwrap();
    let p = ChartPoint::new(vec![0.6, 0.3, -0.2]);
    let h = MetricField::from_chart(chart);
    let g = h.perturbed(&perturbation(&h, 0.1, 0.3));

    assert!(deturck_field_at(&g, &g, &p, &fd).unwrap().amax() < 1e-8);
    assert!(deturck_field_at(&g, &g.scaled(3.0), &p, &fd).unwrap().amax() < 1e-8);

    let tau = g.perturbed(&perturbation(&h, 0.1, 1.7));
    let w = deturck_field_at(&g, &tau, &p, &fd).unwrap();
    let (gc, tc) = (g.clone(), tau.clone());
    let want = deturck_oracle(&|y| gc.at(y).unwrap(), &|y| tc.at(y).unwrap(), p.coords(), 1e-4);
    assert!(want.amax() > 1e-2);
    assert!((&w - &want).amax() < 1e-5 * want.amax(), "{w} vs {want}");
}

#[test]
fn stencil_leaving_chart_is_an_error() {
    let chart = Chart::collar(3, BoundaryMetric::Euclidean).unwrap();
    let h = MetricField::from_chart(chart);
    let p = ChartPoint::new(vec![7.9999, 0.0, 0.0]);
    assert!(ricci_at(&h, &p, &FdScheme::new(1e-2)).is_err());
    assert!(christoffels_at(&h, &p, &FdScheme { step: 0.0, ..FdScheme::default() }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn christoffels_symmetric_in_lower_pair(rho in 0.1f64..2.0, y in -1.0f64..1.0, amp in 0.0f64..0.2) {
        let chart = Chart::collar(3, BoundaryMetric::Euclidean).unwrap();
        let h = MetricField::from_chart(chart);
        let g = h.perturbed(&perturbation(&h, amp, y));
        let gam = christoffels_at(&g, &ChartPoint::new(vec![rho, y, 0.1]), &FdScheme::default()).unwrap();
        for k in 0..3 { for i in 0..3 { for j in 0..3 {
            prop_assert!((gam[(k, i, j)] - gam[(k, j, i)]).abs() <= 1e-12 * gam.max_abs().max(1.0));
        }}}
    }

    #[test]
    fn ricci_is_symmetric(rho in 0.1f64..2.0, amp in 0.0f64..0.2, phase in 0.0f64..3.0) {
        let chart = Chart::collar(4, BoundaryMetric::Euclidean).unwrap();
        let h = MetricField::from_chart(chart);
        let g = h.perturbed(&perturbation(&h, amp, phase));
        let ric = ricci_at(&g, &ChartPoint::new(vec![rho, 0.2, -0.4, 0.9]), &FdScheme::default()).unwrap();
        prop_assert!((&ric - ric.transpose()).amax() == 0.0);
    }
}
