use pelab_core::charts::{rescaled_metric_at, BoundaryMetric, Chart, ChartKind, RescalingCase};
use pelab_core::solver::*;
use pelab_core::{SolverError, WeightVector};
use proptest::prelude::*;
use std::sync::Arc;

fn cusp() -> Chart {
    Chart::intermediate_cusp(4, 1).unwrap()
}

fn cusp_weights(mu: f64, nu: f64) -> WeightVector {
    WeightVector::new(4, nu, vec![mu], vec![1]).unwrap()
}

fn cusp_grid(eps: f64, spacing: f64) -> Arc<Grid2D> {
    Arc::new(Grid2D::exhaustion(cusp(), eps, spacing, GridBox::default()).unwrap())
}

fn box_grid(chart: Chart, m: usize) -> Arc<Grid2D> {
    let axes = match chart.kind {
        ChartKind::IntermediateCusp => [Axis::new(-1.5, 0.5, m), Axis::new(0.2, 2.0, m)],
        _ => [Axis::new(-2.0, 0.0, m), Axis::new(-1.0, 1.0, m)],
    };
    Arc::new(Grid2D::new(chart, axes, 1e-12, false).unwrap())
}

#[test]
fn constant_field_maps_to_k_times_constant() {
    for chart in [cusp(), Chart::collar(4, BoundaryMetric::Euclidean).unwrap(), Chart::maximal_cusp(4).unwrap()] {
        let g = box_grid(chart, 21);
        for k in [-2.0, 0.0, 6.0] {
            let op = assemble(g.clone(), k).unwrap();
            let out = op.apply_full(&g.sample(|_, _| 3.0));
            for idx in (0..g.len()).filter(|&i| op.is_interior(i)) {
                assert!((out.values[idx] - 3.0 * k).abs() < 1e-9 * (1.0 + out.values[idx].abs()));
            }
        }
    }
}

#[test]
fn assembled_operator_is_symmetric_with_positive_diagonal() {
    let op = assemble(cusp_grid(0.1, 0.1), 0.0).unwrap();
    assert!(op.symmetric);
    assert!(op.matrix.diagonal().iter().all(|&d| d > 0.0));
}

#[test]
fn barrier_consistency_order() {
    let cases = [
        (cusp(), cusp_weights(0.4, 1.75)),
        (Chart::collar(4, BoundaryMetric::Euclidean).unwrap(), WeightVector::new(4, 1.75, vec![], vec![]).unwrap()),
        (Chart::maximal_cusp(4).unwrap(), WeightVector::new(4, 1.75, vec![0.4], vec![3]).unwrap()),
    ];
    for (chart, w) in cases {
        let r = consistency_check(&chart, -2.0, &w, &[33, 65, 129]).unwrap();
        assert!(r.orders.iter().all(|&o| o >= 1.9), "{:?}: {:?}", r.kind, r.orders);
        assert!(r.levels.last().unwrap().1 < 1e-3);
    }
}

#[test]
fn zero_data_gives_zero_solution() {
    let g = cusp_grid(0.1, 0.1);
    let op = assemble(g.clone(), -2.0).unwrap();
    let (u, stats) = solve_dirichlet(&op, &DiscreteField::zeros(g), &SolveOptions::default()).unwrap();
    assert_eq!(u.max_abs(), 0.0);
    assert_eq!(stats.iterations, 0);
}

#[test]
fn residual_meets_tolerance_and_dirichlet_nodes_vanish() {
    let g = cusp_grid(0.05, 0.05);
    let w = cusp_weights(0.5, 1.75);
    let op = assemble(g.clone(), -2.0).unwrap();
    let f = BumpRecipe::default_for(ChartKind::IntermediateCusp).sample(&g, &w);
    let (u, stats) = solve_dirichlet(&op, &f, &SolveOptions::default()).unwrap();
    assert!(stats.residual <= 1e-8);
    assert!((0..g.len()).filter(|&i| !g.is_unknown(i)).all(|i| u.values[i] == 0.0));
    assert!(weighted_sup_norm(&u, &w).is_finite());
}

#[test]
fn manufactured_solution_recovered() {
    let w = cusp_weights(0.5, 1.75);
    let recipe = BumpRecipe::default_for(ChartKind::IntermediateCusp);
    let opts = SolveOptions { rtol: 1e-12, ..Default::default() };
    for eps in [0.2, 0.05] {
        let r = manufactured_check(cusp_grid(eps, 0.05), -2.0, &w, &recipe, &opts).unwrap();
        assert!(r.rel_error <= 1e-6, "eps {eps}: {}", r.rel_error);
    }
    let collar = Chart::collar(4, BoundaryMetric::Euclidean).unwrap();
    let g = Arc::new(Grid2D::exhaustion(collar, 0.1, 0.05, GridBox::default()).unwrap());
    let w0 = WeightVector::new(4, 1.75, vec![], vec![]).unwrap();
    let r = manufactured_check(g, -2.0, &w0, &BumpRecipe::default_for(ChartKind::Collar), &opts).unwrap();
    assert!(r.rel_error <= 1e-6);
}

#[test]
fn manufactured_support_must_avoid_dirichlet_nodes() {
    let recipe = BumpRecipe { center: (0.6f64.ln(), 0.5), radius: (3.0, 0.3) };
    let err = manufactured_check(cusp_grid(0.1, 0.1), -2.0, &cusp_weights(0.5, 1.75), &recipe, &SolveOptions::default());
    assert!(matches!(err, Err(SolverError::SupportViolation(..))));
}

#[test]
fn weighted_norm_examples() {
    let g = cusp_grid(0.1, 0.1);
    let w = cusp_weights(0.5, 1.75);
    let sig = g.sample(|a, b| g.weight_at(&w, a, b));
    assert!((weighted_sup_norm(&sig, &w) - 1.0).abs() < 1e-14);
    assert!((weighted_sup_norm(&sig.scaled(2.0), &w) - 2.0).abs() < 1e-14);

    let w_more = cusp_weights(0.8, 2.05);
    let faster = g.sample(|a, b| g.weight_at(&w_more, a, b));
    let ratio = |idx: usize| g.weight(&w_more, idx) / g.weight(&w, idx);
    let best = (0..g.len()).filter(|&i| g.in_domain(i)).max_by(|&i, &j| ratio(i).total_cmp(&ratio(j))).unwrap();
    assert!((weighted_sup_norm(&faster, &w) - ratio(best)).abs() < 1e-14);
    let top = (0..g.len()).filter(|&i| g.in_domain(i)).map(|i| g.weight(&w, i)).fold(0.0, f64::max);
    assert!((g.weight(&w, best) - top).abs() < 1e-12);
}

#[test]
fn sweep_single_eps_ratio_is_norm_quotient() {
    let w = cusp_weights(0.5, 1.75);
    let recipe = BumpRecipe::default_for(ChartKind::IntermediateCusp);
    let opts = SolveOptions::default();
    let rep = exhaustion_sweep(&cusp(), -2.0, &w, &recipe, &[0.1], 0.1, &opts, &opts).unwrap();
    let row = &rep.rows[0];
    assert_eq!(row.ratio, row.norm_u / row.norm_f);
    assert_eq!(rep.spread, 1.0);
}

#[test]
fn sweep_ratio_bounded_for_admissible_weights() {
    let w = cusp_weights(0.5, 1.75);
    let recipe = BumpRecipe::default_for(ChartKind::IntermediateCusp);
    let opts = SolveOptions { rtol: 1e-12, ..Default::default() };
    let rep = exhaustion_sweep(&cusp(), -2.0, &w, &recipe, &[0.2, 0.1, 0.05, 0.025], 0.05, &SolveOptions::default(), &opts)
        .unwrap();
    assert!(rep.spread <= 2.0, "{rep:?}");
    assert!(rep.max_manufactured_error <= 1e-6);
}

#[test]
fn sweep_rejects_unordered_eps() {
    let w = cusp_weights(0.5, 1.75);
    let recipe = BumpRecipe::default_for(ChartKind::IntermediateCusp);
    let opts = SolveOptions::default();
    assert!(exhaustion_sweep(&cusp(), -2.0, &w, &recipe, &[0.05, 0.1], 0.1, &opts, &opts).is_err());
}

#[test]
fn maximum_principle_cusp_barrier() {
    let r = maximum_principle_check(cusp_grid(0.05, 0.05), -2.0, &cusp_weights(0.4, 1.75)).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.min_ratio >= r.delta - r.tolerance);
    assert!(r.delta > 0.0);
}

#[test]
fn maximum_principle_zero_weight_is_k() {
    let r = maximum_principle_check(cusp_grid(0.1, 0.1), -2.0, &cusp_weights(0.0, 0.0)).unwrap();
    assert!((r.min_ratio + 2.0).abs() < 1e-10 && (r.max_ratio + 2.0).abs() < 1e-10);
}

#[test]
fn maximal_cusp_barrier_negative_everywhere() {
    let g = Arc::new(Grid2D::exhaustion(Chart::maximal_cusp(4).unwrap(), 0.05, 0.05, GridBox::default()).unwrap());
    for mu in [0.05, 0.4, 1.0] {
        let w = WeightVector::new(4, 1.75, vec![mu], vec![3]).unwrap();
        let r = maximum_principle_check(g.clone(), -2.0, &w).unwrap();
        assert!(r.all_negative, "mu {mu}: {r:?}");
    }
}

#[test]
fn indefinite_operator_reported() {
    let g = cusp_grid(0.1, 0.05);
    let op = assemble(g.clone(), -10.0).unwrap();
    let f = g.sample(|_, _| 1.0);
    match solve_dirichlet(&op, &f, &SolveOptions::default()) {
        Err(SolverError::NonConvergence { indefinite, .. }) => assert!(indefinite),
        other => panic!("expected NonConvergence, got {other:?}"),
    }
    let opts = SolveOptions { allow_indefinite: true, ..Default::default() };
    let (_, stats) = solve_dirichlet(&op, &f, &opts).unwrap();
    assert_eq!(stats.method, SolveMethod::BandedLu);
    assert!(stats.residual < 1e-8);
}

#[test]
fn banded_elimination_matches_cg() {
    let op = assemble(cusp_grid(0.1, 0.1), 1.0).unwrap();
    let b: Vec<f64> = (0..op.matrix.n).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
    let (x, _) = solve(&op.matrix, &b, &SolveOptions { rtol: 1e-13, ..Default::default() }).unwrap();
    let y = banded_lu_solve(&op.matrix, &b).unwrap();
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-9 * scale));
}

#[test]
fn coarse_grid_rejected() {
    let axes = [Axis::new(-1.0, 0.0, 5), Axis::new(0.2, 1.0, 20)];
    assert!(matches!(Grid2D::new(cusp(), axes, 0.1, false), Err(SolverError::GridTooCoarse(_))));
}

#[test]
fn koiso_zero_field() {
    let p = KoisoPatch::new(4, 17);
    let r = koiso_quadrature(&p, &p.sample(&TraceFreeBumps::zero(4)), -2.0).unwrap();
    assert_eq!((r.lhs, r.rhs, r.gap, r.slack), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn koiso_identity_converges_and_bound_holds() {
    let r = koiso_refinement(4, 7, &[17, 33, 65], -2.0).unwrap();
    assert!(r.order >= 1.8, "order {}", r.order);
    let finest = r.reports.last().unwrap();
    assert!(finest.gap <= 1e-3 * finest.lhs);
    assert!(finest.slack >= -10.0 * finest.gap);
}

#[test]
fn koiso_support_violation() {
    let p = KoisoPatch::new(4, 17);
    let mut u = p.sample(&random_trace_free_bumps(4, 1));
    u[p.x.nodes + 1][(0, 1)] = 1e-3;
    assert!(matches!(koiso_quadrature(&p, &u, -2.0), Err(SolverError::SupportViolation(1, 1))));
}

#[test]
fn rescaled_identity_at_origin() {
    let case = RescalingCase::near_axis(3, 1, vec![0.0], 0.01);
    let g = rescaled_metric_at(&case, &[0.0, 0.0, 0.0]).unwrap();
    let eig = g.symmetric_eigen().eigenvalues;
    assert!(eig.iter().all(|e| (e - 1.0).abs() < 1e-14));
}

#[test]
fn schauder_near_axis_band_independent_of_eps() {
    let rows = schauder_coefficient_scan(CaseFamily::NearAxis, &[1e-1, 1e-2, 1e-3, 1e-4], 9).unwrap();
    for r in &rows[1..] {
        assert!((r.min_eig - rows[0].min_eig).abs() < 1e-12 && (r.max_eig - rows[0].max_eig).abs() < 1e-12);
    }
}

#[test]
fn schauder_families_uniform() {
    for fam in CaseFamily::ALL {
        let rows = schauder_coefficient_scan(fam, &[1e-1, 1e-2, 1e-3, 1e-4], 9).unwrap();
        let u = schauder_uniformity(&rows).unwrap();
        assert!(u.pass, "{u:?}");
        assert!(rows.iter().all(|r| r.min_eig > 0.0 && r.max_coeff_derivative.is_finite()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn discrete_maximum_principle(k in 0.0f64..6.0, seed in 0u64..1000) {
        let g = cusp_grid(0.2, 0.1);
        let op = assemble(g.clone(), k).unwrap();
        let f = g.sample(|a, b| (((a * 13.0 + b * 7.0 + seed as f64).sin()) + 1.0) * 0.5);
        let (u, _) = solve_dirichlet(&op, &f, &SolveOptions { rtol: 1e-12, ..Default::default() }).unwrap();
        let min = u.values.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(min >= -1e-10);
    }
}
