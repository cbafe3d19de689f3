use crate::report::{num, Check, CliError, Report, Table, EXIT_NUMERICAL};
use crate::RunConfig;
use nalgebra::DMatrix;
use pelab_core::tensorcalc::{norm_sq_with, ricci_at};
use pelab_core::{BoundaryMetric, Chart, ChartKind, ChartPoint, FdScheme, MetricField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// The four chart families at dimension `n`.
pub fn chart_family(n: usize) -> Result<Vec<Chart>, CliError> {
    Ok(vec![
        Chart::intermediate_cusp(n, 1)?,
        Chart::maximal_cusp(n)?,
        Chart::collar(n, BoundaryMetric::Euclidean)?,
        Chart::upper_half_space(n, 1)?,
    ])
}

/// A random point well inside the chart: radial coordinate in `[0.25, 1.5]`,
/// polar angle in `[0.35, 1.3]`, sphere angles away from the poles.
pub fn random_point(chart: &Chart, rng: &mut impl Rng) -> ChartPoint {
    let n = chart.n;
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    x[0] = rng.random_range(0.25f64.ln()..1.5f64.ln()).exp();
    if chart.kind == ChartKind::IntermediateCusp {
        x[1] = rng.random_range(0.35..1.3);
        for v in x.iter_mut().take(1 + chart.b()).skip(2) {
            *v = rng.random_range(0.3..PI - 0.3);
        }
    }
    ChartPoint(x)
}

fn hnorm(h: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<f64, CliError> {
    Ok(norm_sq_with(h, t)?.max(0.0).sqrt())
}

/// `|Ric(g) + (n-1) g|_g` at `p`.
pub fn einstein_defect(g: &MetricField, p: &ChartPoint, fd: &FdScheme) -> Result<f64, CliError> {
    let n = g.dim() as f64;
    let gm = g.at(p.coords())?;
    let ric = ricci_at(g, p, fd)?;
    hnorm(&gm, &(ric + &gm * (n - 1.0)))
}

fn metric_for(chart: &Chart, perturb: f64) -> MetricField {
    let h = MetricField::from_chart(chart.clone());
    if perturb == 0.0 {
        return h;
    }
    MetricField::new(chart.clone(), "perturbed", move |x| {
        h.tensor().at_unchecked(x) * (1.0 + perturb * (x[0] + 0.7 * x[1]).sin())
    })
}

fn kind_name(kind: ChartKind) -> &'static str {
    match kind {
        ChartKind::IntermediateCusp => "cusp",
        ChartKind::MaximalCusp => "maximal",
        ChartKind::Collar => "collar",
        ChartKind::UpperHalfSpace => "upper_half_space",
    }
}

pub fn run(cfg: &RunConfig, r: &mut Report) -> Result<i32, CliError> {
    let n = cfg.usize_or("n", 4)?;
    let samples = cfg.usize_or("samples", 60)?;
    let step = cfg.positive_f64("step", 1e-3)?;
    let tol = cfg.positive_f64("tol", 1e-4)?;
    let seed = cfg.u64_or("seed", 1)?;
    let perturb = cfg.f64_or("perturb", 0.0)?;
    let min_order = cfg.positive_f64("min_order", 1.9)?;
    if samples == 0 {
        return Err(CliError::Usage("samples must be positive".into()));
    }
    let fd = FdScheme::new(step);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Table::new("points", &["chart", "point", "defect"]);
    let mut orders = Table::new("orders", &["chart", "step", "defect", "order"]);
    let (mut worst, mut total, mut worst_order) = (0.0f64, 0usize, f64::INFINITY);
    for chart in chart_family(n)? {
        let name = kind_name(chart.kind);
        let g = metric_for(&chart, perturb);
        let mut chart_max = 0.0f64;
        for i in 0..samples {
            let p = random_point(&chart, &mut rng);
            let d = einstein_defect(&g, &p, &fd)?;
            chart_max = chart_max.max(d);
            points.push(vec![name.into(), i.to_string(), num(d)]);
        }
        total += samples;
        worst = worst.max(chart_max);
        r.line(format!("{name}: max defect {chart_max:.3e} over {samples} points"));
        // Convergence order at the reference point from halved steps.
        let p = chart.reference_point();
        let steps = [4e-2, 2e-2, 1e-2];
        let errs = steps.iter().map(|&s| einstein_defect(&g, &p, &FdScheme::new(s))).collect::<Result<Vec<_>, _>>()?;
        for (i, (&s, &e)) in steps.iter().zip(&errs).enumerate() {
            let order = if i > 0 && errs[i - 1] > 1e-10 && e > 0.0 { (errs[i - 1] / e).log2() } else { f64::NAN };
            if order.is_finite() {
                worst_order = worst_order.min(order);
            }
            orders.push(vec![name.into(), num(s), num(e), num(order)]);
        }
    }
    r.data("points", total);
    r.data("step", step);
    r.data("perturb", perturb);
    r.check(Check::at_most("max |Ric(h) + (n-1) h|_h", worst, tol, "Rc(h) = -(n-1) h"));
    if perturb == 0.0 {
        r.check(Check::at_least("sampled points", total as f64, 200.0, "sample count"));
        if worst_order.is_finite() {
            r.check(Check::at_least("Richardson order", worst_order, min_order, "second-order centred differences"));
        }
    }
    // Flat control: the Euclidean metric has Ric = 0.
    let flat_chart = Chart::upper_half_space(n, 0)?;
    let flat = MetricField::new(flat_chart.clone(), "flat", move |_| DMatrix::identity(n, n));
    let mut flat_max = 0.0f64;
    for _ in 0..8 {
        let p = random_point(&flat_chart, &mut rng);
        flat_max = flat_max.max(ricci_at(&flat, &p, &fd)?.amax());
    }
    r.check(Check::at_most("max |Ric(flat)|", flat_max, tol, "Ric = 0 for the Euclidean metric"));
    r.tables.push(points);
    r.tables.push(orders);
    Ok(EXIT_NUMERICAL)
}
