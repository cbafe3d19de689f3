use crate::report::{num, Check, CliError, Report, Table, EXIT_NUMERICAL};
use crate::RunConfig;
use pelab_core::solver::*;
use pelab_core::weights::{admissible_weights, mu0_window, DEFAULT_DELTA_MIN};
use pelab_core::{Chart, ChartKind, WeightError, WeightVector};
use std::sync::Arc;

/// Chart from the `kind`, `n`, `f`, `h_u` keys; `chart` is accepted for `kind`.
pub fn chart_from(cfg: &RunConfig) -> Result<Chart, CliError> {
    let mut kv = cfg.kv.clone();
    if let Some(c) = cfg.kv.get("chart") {
        kv.set("kind", c);
    }
    if kv.get("kind").is_none() {
        kv.set("kind", "cusp");
    }
    let chart = Chart::from_config(&kv)?;
    if chart.kind == ChartKind::UpperHalfSpace {
        return Err(CliError::Usage("the solver runs on cusp, maximal or collar charts".into()));
    }
    Ok(chart)
}

/// `auto` picks admissible weights for `K = -2`; otherwise `mu0[,mu1]`.
pub fn weights_from(cfg: &RunConfig, chart: &Chart) -> Result<WeightVector, CliError> {
    let n = chart.n;
    let spec = cfg.str_or("weights", "auto");
    if spec.trim() == "auto" {
        return match chart.kind {
            ChartKind::IntermediateCusp => Ok(admissible_weights(n, &[chart.f], DEFAULT_DELTA_MIN)?.0),
            ChartKind::Collar => {
                let w0 = mu0_window(n, -2.0);
                if w0.is_empty() {
                    return Err(WeightError::DimensionTooSmall(n).into());
                }
                let mu0 = if w0.contains(n as f64 - 2.0) { n as f64 - 2.0 } else { w0.midpoint() };
                Ok(WeightVector::new(n, mu0, vec![], vec![])?)
            }
            _ => Err(WeightError::AdmissibilityObstruction {
                index: 0,
                rank: n - 1,
                n,
                reason: "maximal-rank cusp has no admissible weight; pass explicit weights".into(),
            }
            .into()),
        };
    }
    let v = pelab_core::config::parse_list(spec).map_err(|e| CliError::Usage(format!("weights: {e}")))?;
    match (chart.kind, v.as_slice()) {
        (ChartKind::Collar, [mu0]) => Ok(WeightVector::new(n, *mu0, vec![], vec![])?),
        (ChartKind::Collar, [mu0, _]) => Ok(WeightVector::new(n, *mu0, vec![], vec![])?),
        (_, [mu0, mu1]) => Ok(WeightVector::new(n, *mu0, vec![*mu1], vec![chart.f])?),
        _ => Err(CliError::Usage(format!("weights `{spec}`: expected `auto` or `mu0,mu1`"))),
    }
}

fn options(cfg: &RunConfig, rtol_default: f64) -> Result<SolveOptions, CliError> {
    Ok(SolveOptions {
        rtol: cfg.positive_f64("rtol", rtol_default)?,
        max_iter: None,
        allow_indefinite: cfg.bool_or("allow_indefinite", false)?,
    })
}

pub fn run_solve(cfg: &RunConfig, r: &mut Report) -> Result<i32, CliError> {
    let chart = chart_from(cfg)?;
    let k = cfg.f64_or("K", -2.0)?;
    let w = weights_from(cfg, &chart)?;
    let eps = cfg.eps_list("eps", &[0.05])?;
    if eps.len() != 1 {
        return Err(CliError::Usage("solve takes a single eps; use sweep for a list".into()));
    }
    let spacing = cfg.positive_f64("spacing", 0.05)?;
    let opts = options(cfg, 1e-12)?;
    let tol = cfg.positive_f64("tol", 1e-6)?;
    r.data("weights", &w);
    r.data("K", k);
    let grid = Arc::new(Grid2D::exhaustion(chart.clone(), eps[0], spacing, GridBox::default())?);
    let (nx, ny) = grid.shape();
    r.data("grid", [nx, ny]);
    r.line(format!("grid {nx} x {ny}, {} unknowns", grid.unknown_count()));
    let recipe = BumpRecipe::default_for(chart.kind);
    let m = manufactured_check(grid.clone(), k, &w, &recipe, &opts)?;
    let mut t = Table::new("manufactured", &["eps", "unknowns", "iterations", "residual", "rel_error"]);
    t.push(vec![num(m.eps), m.unknowns.to_string(), m.iterations.to_string(), num(m.residual), num(m.rel_error)]);
    r.tables.push(t);
    r.check(Check::at_most("manufactured relative error", m.rel_error, tol, "exact recovery of u* = sigma^mu bump"));
    r.data("manufactured", &m);
    if chart.kind == ChartKind::IntermediateCusp {
        let mp = maximum_principle_check(grid, k, &w)?;
        r.check(Check::at_least("barrier ratio minus closed-form minimum", mp.min_ratio - mp.closed_min, -mp.tolerance, "(Delta + K) sigma^mu / sigma^mu >= closed-form infimum"));
        r.data("barrier", &mp);
    }
    Ok(EXIT_NUMERICAL)
}

pub fn run_sweep(cfg: &RunConfig, r: &mut Report) -> Result<i32, CliError> {
    let chart = chart_from(cfg)?;
    let k = cfg.f64_or("K", -2.0)?;
    let w = weights_from(cfg, &chart)?;
    let eps = cfg.eps_list("eps", &[0.2, 0.1, 0.05, 0.025])?;
    let spacing = cfg.positive_f64("spacing", 0.05)?;
    let opts = options(cfg, 1e-8)?;
    let mopts = SolveOptions { rtol: 1e-12, ..opts };
    let max_spread = cfg.positive_f64("max_spread", 2.0)?;
    let tol = cfg.positive_f64("tol", 1e-6)?;
    r.data("weights", &w);
    r.data("K", k);
    let recipe = BumpRecipe::default_for(chart.kind);
    let rep = exhaustion_sweep(&chart, k, &w, &recipe, &eps, spacing, &opts, &mopts)?;
    let mut t = Table::new("ratios", &["eps", "nodes", "unknowns", "iterations", "norm_u", "norm_f", "ratio", "manufactured_rel_error"]);
    for row in &rep.rows {
        r.line(format!("eps {:<8} ratio {:.6} manufactured {:.2e}", row.eps, row.ratio, row.manufactured_rel_error));
        t.push(vec![
            num(row.eps),
            row.nodes.to_string(),
            row.unknowns.to_string(),
            row.iterations.to_string(),
            num(row.norm_u),
            num(row.norm_f),
            num(row.ratio),
            num(row.manufactured_rel_error),
        ]);
    }
    r.tables.push(t);
    r.check(Check::at_most("ratio max/min across eps", rep.spread, max_spread, "||u||_mu <= C ||f||_mu uniformly in eps"));
    r.check(Check::at_most("max manufactured relative error", rep.max_manufactured_error, tol, "exact recovery of u* = sigma^mu bump"));
    r.data("sweep", &rep);
    Ok(EXIT_NUMERICAL)
}
