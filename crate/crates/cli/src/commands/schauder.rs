use crate::report::{num, Check, CliError, Report, Table, EXIT_NUMERICAL};
use crate::RunConfig;
use pelab_core::solver::{schauder_coefficient_scan, schauder_uniformity, CaseFamily};

pub fn run(cfg: &RunConfig, r: &mut Report) -> Result<i32, CliError> {
    let eps = cfg.eps_list("eps", &[1e-1, 1e-2, 1e-3, 1e-4])?;
    let per_axis = cfg.usize_or("per_axis", 9)?;
    let max_dev = cfg.positive_f64("max_deviation", 0.05)?;
    if per_axis < 2 {
        return Err(CliError::Usage("per_axis must be at least 2".into()));
    }
    let mut t = Table::new("rows", &["family", "eps", "points", "min_eig", "max_eig", "max_cond", "max_coeff_derivative"]);
    let mut summaries = Vec::new();
    for family in CaseFamily::ALL {
        let rows = schauder_coefficient_scan(family, &eps, per_axis)?;
        let fam = serde_json::to_value(family).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        for row in &rows {
            t.push(vec![
                fam.clone(),
                num(row.eps),
                row.points.to_string(),
                num(row.min_eig),
                num(row.max_eig),
                num(row.max_cond),
                num(row.max_coeff_derivative),
            ]);
        }
        let u = schauder_uniformity(&rows).ok_or_else(|| CliError::Usage("empty eps list".into()))?;
        r.line(format!("{fam}: median condition {:.4}, max deviation {:.4}", u.median_cond, u.max_rel_deviation));
        r.check(Check::at_most(format!("{fam} condition-number deviation from median"), u.max_rel_deviation, max_dev, "rescaled metrics uniformly equivalent to the Euclidean metric"));
        summaries.push(u);
    }
    r.tables.push(t);
    r.data("families", &summaries);
    Ok(EXIT_NUMERICAL)
}
