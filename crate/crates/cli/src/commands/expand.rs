use crate::report::{num, Check, CliError, Report, Table, EXIT_NUMERICAL};
use crate::RunConfig;
use pelab_core::expansion::{correction_step, expansion_ladder, BoundaryData, ExpansionMetric, ExpansionOptions};
use pelab_core::FdScheme;

pub fn run(cfg: &RunConfig, r: &mut Report) -> Result<i32, CliError> {
    let n = cfg.usize_or("n", 4)?;
    let stages = cfg.usize_or("stages", n.saturating_sub(1))?;
    let seed = cfg.u64_or("seed", 1)?;
    let norm = cfg.f64_or("qhat_norm", 0.05)?;
    if stages == 0 || !(norm >= 0.0) {
        return Err(CliError::Usage("stages must be positive and qhat_norm non-negative".into()));
    }
    if n > 4 && !cfg.bool_or("allow_large", false)? {
        return Err(CliError::Usage(format!("n = {n} is slow; set allow_large=true to run it")));
    }
    let mut opts = ExpansionOptions::default();
    opts.knots = cfg.usize_or("knots", opts.knots)?;
    opts.fd = FdScheme::fourth_order(cfg.positive_f64("step", opts.fd.step)?);
    let bd = BoundaryData::seeded(n, seed, norm)?;
    r.data("boundary", &bd);
    // Stages past n - 1 meet a characteristic exponent; the reachable ones
    // are still run and reported.
    let reachable = stages.min(n - 1);
    let ladder = expansion_ladder(&bd, reachable, &opts)?;
    let mut slopes = Table::new("slopes", &["stage", "y", "slope", "residual"]);
    let mut sup = Table::new("sup", &["stage", "rho", "sup_q"]);
    for st in &ladder.stages {
        slopes.push(vec![st.stage.to_string(), "sup".into(), num(st.vanishing.slope), num(st.vanishing.residual)]);
        for p in &st.vanishing.per_y {
            slopes.push(vec![st.stage.to_string(), num(p.y), num(p.slope), num(p.residual)]);
        }
        for (rho, v) in &st.vanishing.sup {
            sup.push(vec![st.stage.to_string(), num(*rho), num(*v)]);
        }
        r.line(format!(
            "stage {}: slope {:.3} (threshold {}), gauge {:.2e}, fidelity {:.3e}",
            st.stage, st.vanishing.slope, st.threshold, st.gauge_max, st.fidelity
        ));
        let anchor = format!("|Q(g_{}, g_1)|_h = O(rho^{})", st.stage, st.stage);
        r.check(Check::at_least(format!("stage {} vanishing slope", st.stage), st.vanishing.slope, st.threshold, anchor));
        r.check(Check::at_most(format!("stage {} gauge term", st.stage), st.gauge_max, st.gauge_tol, "gauge term of Q(g_j, g_j) vanishes"));
        r.check(Check::holds(format!("stage {} corrections local", st.stage), st.local, "corrections supported in supp psi"));
    }
    r.check(Check::holds("slopes nondecreasing", ladder.monotone, "vanishing order improves with each stage"));
    r.tables.push(slopes);
    r.tables.push(sup);
    r.data("ladder", &ladder);
    if reachable < stages {
        let mut g = ExpansionMetric::first(&bd)?;
        g.stage = reachable;
        correction_step(&g, &g, &opts)?;
    }
    Ok(EXIT_NUMERICAL)
}
