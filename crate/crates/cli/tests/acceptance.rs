//! One line per acceptance criterion; exits nonzero if any fails.

use pelab_cli::{execute, Report, RunConfig, EXIT_NUMERICAL, EXIT_OBSTRUCTION, EXIT_PASS};
use pelab_core::tensorcalc::laplacian_scalar_at;
use pelab_core::weights::*;
use pelab_core::{BoundaryMetric, Chart, ChartPoint, FdScheme, MetricField, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::Command;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn run(cmd: &str, pairs: &[(&str, &str)]) -> Report {
    execute(cmd, &RunConfig::from_pairs(pairs))
}

fn failed_checks(r: &Report) -> String {
    let bad: Vec<String> = r.checks.iter().filter(|c| !c.pass).map(|c| format!("{} = {:e}", c.name, c.value)).collect();
    match (&r.error, bad.is_empty()) {
        (Some(e), _) => format!("error: {}", e.message),
        (None, true) => String::new(),
        (None, false) => bad.join("; "),
    }
}

fn report_outcome(r: &Report, budget: Duration, elapsed: Duration, summary: String) -> Outcome {
    let pass = r.pass && elapsed < budget;
    let mut detail = summary;
    if !r.pass {
        detail.push_str(&format!(" [{}]", failed_checks(r)));
    }
    if elapsed >= budget {
        detail.push_str(&format!(" [over budget {budget:?}]"));
    }
    outcome(pass, detail)
}

fn value(r: &Report, name: &str) -> f64 {
    r.checks.iter().find(|c| c.name == name).map_or(f64::NAN, |c| c.value)
}

fn hyperbolicity() -> Outcome {
    let t = Instant::now();
    let r = run("curvature", &[("n", "4"), ("samples", "60"), ("step", "1e-3"), ("tol", "1e-4")]);
    let summary = format!(
        "max defect {:.3e} over {} points, order {:.3}",
        value(&r, "max |Ric(h) + (n-1) h|_h"),
        value(&r, "sampled points"),
        value(&r, "Richardson order")
    );
    report_outcome(&r, Duration::from_secs(10), t.elapsed(), summary)
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

fn barrier_closed_forms() -> Outcome {
    let t = Instant::now();
    let fd = FdScheme::new(1e-3);
    let k = -2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst, mut draws) = (0.0f64, 0usize);
    for i in 0..60 {
        let (n, f) = [(4, 1), (5, 1), (5, 2)][i % 3];
        let mu: f64 = rng.random_range(0.05..1.5);
        let nu: f64 = rng.random_range(0.05..3.0);
        let r0: f64 = rng.random_range(0.3..1.5);
        let y: f64 = rng.random_range(-1.0..1.0);
        let lap_ratio = |chart: Chart, x: Vec<f64>, u: ScalarField| {
            let h = MetricField::from_chart(chart);
            let p = ChartPoint(x);
            let lap = laplacian_scalar_at(&h, &u, &p, &fd).unwrap();
            lap / u.at(p.coords()) + k
        };
        // r^mu cos^nu t0 on an intermediate cusp.
        let t0: f64 = rng.random_range(0.35..1.3);
        let mut x = vec![y; n];
        x[0] = r0;
        x[1] = t0;
        for v in x.iter_mut().take(n - f).skip(2) {
            *v = rng.random_range(0.5..2.6);
        }
        let got = lap_ratio(
            Chart::intermediate_cusp(n, f).unwrap(),
            x,
            ScalarField::new("r^mu cos^nu", move |x| x[0].powf(mu) * x[1].cos().powf(nu)),
        );
        let (c, s) = barrier_cusp(k, mu, nu, f, n).unwrap();
        worst = worst.max(rel_err(got, c * t0.cos().powi(2) + s * t0.sin().powi(2)));
        // r^mu on a maximal cusp.
        let mut x = vec![y; n];
        x[0] = r0;
        let got = lap_ratio(Chart::maximal_cusp(n).unwrap(), x, ScalarField::new("r^mu", move |x| x[0].powf(mu)));
        worst = worst.max(rel_err(got, barrier_maximal(k, mu, n)));
        // rho^nu on the collar.
        let mut x = vec![y; n];
        x[0] = r0;
        let got = lap_ratio(
            Chart::collar(n, BoundaryMetric::Euclidean).unwrap(),
            x,
            ScalarField::new("rho^nu", move |x| x[0].powf(nu)),
        );
        worst = worst.max(rel_err(got, barrier_H0(k, nu, n)));
        draws += 1;
    }
    let elapsed = t.elapsed();
    let pass = worst <= 1e-3 && draws >= 50 && elapsed < Duration::from_secs(5);
    outcome(pass, format!("{draws} draws x 3 barriers, max relative error {worst:.3e}"))
}

fn weight_windows() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let w4 = mu0_window(4, -2.0);
    let w5 = mu0_window(5, -2.0);
    let ok4 = close(w4.lo, 1.5) && close(w4.hi, 2.0);
    let ok5 = close(w5.lo, 2.0) && close(w5.hi, 2.0 + 2f64.sqrt());
    let ok3 = mu0_window(3, -2.0).is_empty();
    let rank2 = (1..20).all(|i| cusp_weight_window(4, 2, 1.5 + 0.5 * i as f64 / 20.0, -2.0).is_empty());
    let maximal = (3..7).all(|n| {
        cusp_weight_window(n, n - 1, n as f64 - 2.0, -2.0).is_empty()
            && (1..200).all(|i| barrier_maximal(-2.0, i as f64 * 0.05, n) < 0.0)
    });
    outcome(
        ok4 && ok5 && ok3 && rank2 && maximal,
        format!(
            "n=4 ({}, {}), n=5 ({}, {}), n=3 empty {ok3}, rank-2 n=4 empty {rank2}, maximal empty {maximal}",
            w4.lo, w4.hi, w5.lo, w5.hi
        ),
    )
}

fn admissibility_discrepancy() -> Outcome {
    let r = run("weights", &[("n", "5"), ("ranks", "3")]);
    let cusp = r.data.get("cusps").and_then(|c| c.get(0)).cloned().unwrap_or_default();
    let get = |k: &str| cusp.get(k).and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
    let (cand, cand_m, chosen, chosen_m) = (get("candidate"), get("candidate_margin"), get("chosen"), get("chosen_margin"));
    let pass = r.exit_code == EXIT_PASS && (cand - 1.0 / 3.0).abs() < 1e-15 && cand_m < 0.0 && chosen < cand && chosen_m > 0.0;
    outcome(pass, format!("mu = 1/3 margin {cand_m:.4}, mu = {chosen:.4} margin {chosen_m:.4}"))
}

fn koiso() -> Outcome {
    let t = Instant::now();
    let r = run("koiso", &[("refine", "3"), ("seeds", "20"), ("K", "-2")]);
    let summary = format!("min order {:.3} on 17/33/65 nodes, 20 seeds", value(&r, "min fitted order of the identity gap"));
    report_outcome(&r, Duration::from_secs(60), t.elapsed(), summary)
}

fn uniform_estimate() -> Outcome {
    let t = Instant::now();
    let r = run(
        "sweep",
        &[("chart", "cusp"), ("n", "4"), ("f", "1"), ("K", "-2"), ("weights", "auto"), ("eps", "0.2,0.1,0.05,0.025")],
    );
    let summary = format!(
        "ratio spread {:.4}, manufactured error {:.2e}",
        value(&r, "ratio max/min across eps"),
        value(&r, "max manufactured relative error")
    );
    report_outcome(&r, Duration::from_secs(120), t.elapsed(), summary)
}

fn schauder() -> Outcome {
    let t = Instant::now();
    let r = run("schauder", &[("eps", "1e-1,1e-2,1e-3,1e-4"), ("per_axis", "9")]);
    let devs: Vec<String> = r.checks.iter().map(|c| format!("{:.4}", c.value)).collect();
    report_outcome(&r, Duration::from_secs(60), t.elapsed(), format!("deviations {}", devs.join(", ")))
}

fn ladder() -> Outcome {
    let t = Instant::now();
    let r = run("expand", &[("n", "4"), ("stages", "3"), ("qhat_norm", "0.05"), ("seed", "1")]);
    let slopes: Vec<String> = (1..=3).map(|j| format!("{:.3}", value(&r, &format!("stage {j} vanishing slope")))).collect();
    let gauge = (1..=3).map(|j| value(&r, &format!("stage {j} gauge term"))).fold(0.0, f64::max);
    report_outcome(&r, Duration::from_secs(120), t.elapsed(), format!("slopes {}, max gauge {gauge:.2e}", slopes.join(", ")))
}

fn negative_controls() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for ranks in ["2", "3", "1,3"] {
        let r = run("weights", &[("n", "4"), ("ranks", ranks)]);
        pass &= r.exit_code == EXIT_OBSTRUCTION;
        notes.push(format!("n=4 ranks ({ranks}) exit {}", r.exit_code));
    }
    let r = run("weights", &[("n", "5"), ("ranks", "4")]);
    pass &= r.exit_code == EXIT_OBSTRUCTION;
    notes.push(format!("n=5 ranks (4) exit {}", r.exit_code));
    let r = run("solve", &[("K", "-10"), ("eps", "0.1")]);
    let indefinite = r.error.as_ref().is_some_and(|e| e.message.contains("indefinite"));
    pass &= r.exit_code == EXIT_NUMERICAL && indefinite;
    notes.push(format!("K=-10 solve exit {} indefinite {indefinite}", r.exit_code));
    // The installed binary, with the output directory from the environment.
    let dir = tempfile::tempdir().expect("temp dir");
    let status = Command::new(env!("CARGO_BIN_EXE_pelab"))
        .args(["weights", "--n", "4", "--ranks", "2"])
        .env("PELAB_OUT", dir.path())
        .output()
        .expect("run pelab");
    let written = dir.path().join("weights.json").exists();
    pass &= status.status.code() == Some(EXIT_OBSTRUCTION) && written;
    notes.push(format!("binary exit {:?}, report written {written}", status.status.code()));
    outcome(pass, notes.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("hyperbolicity", hyperbolicity),
        ("barrier closed forms", barrier_closed_forms),
        ("weight windows", weight_windows),
        ("admissibility discrepancy", admissibility_discrepancy),
        ("koiso identity", koiso),
        ("uniform estimate", uniform_estimate),
        ("schauder uniformity", schauder),
        ("vanishing-order ladder", ladder),
        ("negative controls", negative_controls),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        if !o.pass {
            failures += 1;
        }
        println!(
            "criterion {} {name}: {} ({:.2}s) {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
