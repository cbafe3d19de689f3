use crate::report::{num, Check, CliError, Report, Table, EXIT_OBSTRUCTION};
use crate::RunConfig;
use pelab_core::weights::*;
use pelab_core::WeightError;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
struct CuspChoice {
    index: usize,
    rank: usize,
    window: Interval,
    candidate: f64,
    candidate_margin: f64,
    chosen: f64,
    chosen_margin: f64,
}

fn cusp_margin(k: f64, mu: f64, mu0: f64, f: usize, n: usize) -> Result<f64, WeightError> {
    if f + 1 == n {
        return Ok(barrier_maximal(k, mu, n));
    }
    let (c, s) = barrier_cusp(k, mu, mu0, f, n)?;
    Ok(c.min(s))
}

fn obstruction(index: usize, rank: usize, n: usize, reason: String) -> CliError {
    CliError::from(WeightError::AdmissibilityObstruction { index, rank, n, reason })
}

pub fn run(cfg: &RunConfig, r: &mut Report) -> Result<i32, CliError> {
    let n = cfg.usize_or("n", 4)?;
    let ranks = cfg.usize_list("ranks")?.unwrap_or_else(|| vec![1]);
    let k = cfg.f64_or("K", -2.0)?;
    let delta_min = cfg.positive_f64("delta_min", DEFAULT_DELTA_MIN)?;
    let mu0_flag = cfg.kv.get_f64("mu0").map_err(CliError::Usage)?;
    let mus_flag = cfg.f64_list("mus")?;
    if mus_flag.is_some() && mu0_flag.is_none() {
        return Err(CliError::Usage("mus needs mu0".into()));
    }
    if n < 3 {
        return Err(CliError::Usage(format!("n = {n} < 3")));
    }
    for &f in &ranks {
        if f < 1 || f + 1 > n {
            return Err(CliError::Usage(format!("rank {f} outside [1, {}]", n - 1)));
        }
    }
    r.data("n", n);
    r.data("ranks", &ranks);
    r.data("K", k);

    let w0 = mu0_window(n, k);
    r.data("mu0_window", w0);
    r.line(format!("mu0 window: ({}, {})", w0.lo, w0.hi));
    for (index, &f) in ranks.iter().enumerate() {
        if f + 1 == n {
            return Err(obstruction(
                index,
                f,
                n,
                format!("maximal-rank cusp: K - mu (mu + n - 1) < 0 for every mu >= 0 (K = {k})"),
            ));
        }
    }
    if w0.is_empty() {
        return Err(WeightError::DimensionTooSmall(n).into());
    }
    let closed_mu0 = n as f64 - 2.0;
    let mu0 = match mu0_flag {
        Some(m) => m,
        None if w0.contains(closed_mu0) => closed_mu0,
        None => w0.midpoint(),
    };
    r.data("mu0", mu0);
    r.check(Check::holds("mu0 inside its window", w0.contains(mu0), "(n-1)/2 < mu0 < upper root of nu (nu - (n-1)) = K"));

    let mut table = Table::new("cusps", &["index", "rank", "window_lo", "window_hi", "candidate", "candidate_margin", "chosen", "chosen_margin"]);
    let mut choices = Vec::new();
    let mut mus = Vec::new();
    for (index, &f) in ranks.iter().enumerate() {
        let win = cusp_weight_window(n, f, mu0, k);
        r.line(format!("cusp {index} (rank {f}): mu window ({}, {})", win.lo, win.hi));
        if win.is_empty() {
            r.data("cusp_windows", choices.iter().map(|c: &CuspChoice| c.window).collect::<Vec<_>>());
            return Err(obstruction(
                index,
                f,
                n,
                format!("rank-{f} cusp in n={n}: (n-1-f) mu0 + K = {} <= 0 for mu0 = {mu0}", (n - 1 - f) as f64 * mu0 + k),
            ));
        }
        let candidate = 1.0 / (n as f64 - 2.0);
        let chosen = match &mus_flag {
            Some(v) => *v.get(index).ok_or_else(|| CliError::Usage(format!("mus has no entry for cusp {index}")))?,
            None if win.contains(candidate) => candidate,
            None => win.hi / 2.0,
        };
        let c = CuspChoice {
            index,
            rank: f,
            window: win,
            candidate,
            candidate_margin: cusp_margin(k, candidate, mu0, f, n)?,
            chosen,
            chosen_margin: cusp_margin(k, chosen, mu0, f, n)?,
        };
        table.push(vec![
            index.to_string(),
            f.to_string(),
            num(win.lo),
            num(win.hi),
            num(candidate),
            num(c.candidate_margin),
            num(chosen),
            num(c.chosen_margin),
        ]);
        if !win.contains(candidate) {
            r.line(format!(
                "cusp {index}: closed-form mu = {candidate} lies outside the window (margin {:.4}); using {chosen} (margin {:.4})",
                c.candidate_margin, c.chosen_margin
            ));
        }
        r.check(Check::holds(format!("cusp {index} weight inside its window"), win.contains(chosen), "0 < mu_i < positive root of mu^2 + f mu = (n-1-f) mu0 + K"));
        choices.push(c);
        mus.push(chosen);
    }
    r.data("cusps", &choices);
    r.tables.push(table);

    let w = WeightVector::new(n, mu0, mus, ranks.clone())?;
    let margins = estimate_margins(&w, k)?;
    let mut mt = Table::new("margins", &["end", "delta"]);
    for m in &margins {
        let end = match m.end_kind {
            EndKind::H0 => "H0".to_string(),
            EndKind::Cusp { index, rank } => format!("cusp{index}_rank{rank}"),
        };
        mt.push(vec![end.clone(), num(m.delta)]);
        r.check(Check::at_least(format!("barrier margin at {end}"), m.delta, delta_min, "(Delta + K) sigma^mu >= delta sigma^mu with delta > 0"));
    }
    r.tables.push(mt);
    r.check(Check::holds("L2 cutoff", l2_cutoff_check(&w), "mu0 > (n-1)/2 and mu_i > -f_i/2"));
    r.data("weights", &w);
    r.data("margins", &margins);
    r.data("margins_trace_block", estimate_margins(&w, 2.0 * (n as f64 - 1.0))?);
    Ok(EXIT_OBSTRUCTION)
}
