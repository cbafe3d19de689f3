use crate::report::{num, Check, CliError, Report, Table, EXIT_NUMERICAL};
use crate::RunConfig;
use pelab_core::solver::koiso_refinement;

pub fn run(cfg: &RunConfig, r: &mut Report) -> Result<i32, CliError> {
    let n = cfg.usize_or("n", 4)?;
    let levels = cfg.usize_or("refine", 3)?;
    let seeds = cfg.usize_or("seeds", 20)?;
    let first = cfg.u64_or("seed", 0)?;
    let k = cfg.f64_or("K", -2.0)?;
    let min_order = cfg.positive_f64("min_order", 1.8)?;
    if levels < 2 || seeds == 0 || n < 3 {
        return Err(CliError::Usage("koiso needs refine >= 2, seeds >= 1 and n >= 3".into()));
    }
    let counts: Vec<usize> = (0..levels).map(|i| 16 * (1 << i) + 1).collect();
    r.data("node_counts", &counts);
    let mut t = Table::new("levels", &["seed", "nodes", "spacing", "lhs", "rhs", "gap", "pairing", "norm_sq", "slack"]);
    let (mut worst_order, mut worst_slack, mut finest_gap) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    let mut slack_ok = true;
    for seed in first..first + seeds as u64 {
        let rf = koiso_refinement(n, seed, &counts, k)?;
        for rep in &rf.reports {
            t.push(vec![
                seed.to_string(),
                rep.nodes.to_string(),
                num(rep.spacing),
                num(rep.lhs),
                num(rep.rhs),
                num(rep.gap),
                num(rep.pairing),
                num(rep.norm_sq),
                num(rep.slack),
            ]);
        }
        let fine = rf.reports.last().expect("at least two levels");
        // Relative to the allowance -10 * gap on the finest grid.
        slack_ok &= fine.slack >= -10.0 * fine.gap;
        finest_gap = finest_gap.max(fine.gap);
        worst_slack = worst_slack.min(fine.slack);
        worst_order = worst_order.min(rf.order);
        r.line(format!("seed {seed}: order {:.3}, finest gap {:.3e}, slack {:.4e}", rf.order, fine.gap, fine.slack));
    }
    r.tables.push(t);
    r.check(Check::at_least("min fitted order of the identity gap", worst_order, min_order, "||nabla u||^2 = 1/2 ||T||^2 + ||div u||^2 - ||tr u||^2 + n ||u||^2"));
    r.check(Check::at_least("min (u, P u) - (n + K) ||u||^2 on the finest grid", worst_slack, -10.0 * finest_gap, "(u, P u) >= (n + K) ||u||^2"));
    r.check(Check::holds("slack within 10 finest gaps for every seed", slack_ok, "(u, P u) >= (n + K) ||u||^2"));
    Ok(EXIT_NUMERICAL)
}
