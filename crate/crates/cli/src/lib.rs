//! The `pelab` command line: configuration layering, report writing and
//! one runner per subcommand.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

pub use args::{Cli, Command};
pub use config::RunConfig;
pub use report::{Check, CliError, Relation, Report, Table, EXIT_NUMERICAL, EXIT_OBSTRUCTION, EXIT_PASS, EXIT_USAGE};

use pelab_core::{ChartError, ExpansionError, SolverError, TensorError, WeightError};
use std::path::PathBuf;
use std::time::Instant;

impl From<ChartError> for CliError {
    fn from(e: ChartError) -> Self {
        match e {
            ChartError::Config(_) | ChartError::InvalidChart(_) | ChartError::CaseInvariant(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<TensorError> for CliError {
    fn from(e: TensorError) -> Self {
        match e {
            TensorError::Chart(c) => c.into(),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<WeightError> for CliError {
    fn from(e: WeightError) -> Self {
        match e {
            WeightError::InvalidWeights(_) => CliError::Usage(e.to_string()),
            _ => CliError::Obstruction(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Chart(c) => c.into(),
            SolverError::InvalidGrid(_) | SolverError::GridTooCoarse(_) => CliError::Usage(e.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ExpansionError> for CliError {
    fn from(e: ExpansionError) -> Self {
        match e {
            ExpansionError::InvalidBoundaryData(_) => CliError::Usage(e.to_string()),
            ExpansionError::CharacteristicExponentHit { .. } => CliError::Obstruction(e.to_string()),
            ExpansionError::Chart(c) => c.into(),
            ExpansionError::Tensor(t) => t.into(),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

/// Runs one subcommand against a configuration. The report is complete
/// (pass flag, exit code, error object) in every case.
pub fn execute(command: &str, cfg: &RunConfig) -> Report {
    let start = Instant::now();
    let mut report = Report::new(command, cfg.entries());
    let result = match command {
        "weights" => commands::weights::run(cfg, &mut report),
        "curvature" => commands::curvature::run(cfg, &mut report),
        "solve" => commands::solve::run_solve(cfg, &mut report),
        "sweep" => commands::solve::run_sweep(cfg, &mut report),
        "koiso" => commands::koiso::run(cfg, &mut report),
        "schauder" => commands::schauder::run(cfg, &mut report),
        "expand" => commands::expand::run(cfg, &mut report),
        other => Err(CliError::Usage(format!("unknown command `{other}`"))),
    };
    match result {
        Ok(fail_code) => {
            report.pass = report.all_checks_pass();
            report.exit_code = if report.pass { EXIT_PASS } else { fail_code };
        }
        Err(e) => report.fail_with(&e),
    }
    report.elapsed_s = start.elapsed().as_secs_f64();
    report
}

/// `--out`, else `$PELAB_OUT`, else `./pelab-out`.
pub fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("PELAB_OUT").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("pelab-out"))
}
