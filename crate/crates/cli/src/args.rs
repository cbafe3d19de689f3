use clap::{Args, Parser, Subcommand};
use pelab_core::config::KeyValues;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "pelab", version, about = "Numerical checks for weighted analysis on geometrically finite hyperbolic manifolds")]
pub struct Cli {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $PELAB_OUT, else ./pelab-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Extra `key=value` settings, applied after the file and before flags.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weight windows, the chosen weight vector and barrier margins.
    Weights(WeightsArgs),
    /// Ricci defect of the model metrics on every chart kind.
    Curvature(CurvatureArgs),
    /// One manufactured-solution solve on an exhaustion grid.
    Solve(SolveArgs),
    /// Weighted norm ratios across a decreasing eps list.
    Sweep(SolveArgs),
    /// Integral identity for trace-free tensors under grid refinement.
    Koiso(KoisoArgs),
    /// Coefficient bounds of the rescaled metrics.
    Schauder(SchauderArgs),
    /// Correction ladder of the formal expansion at the conformal boundary.
    Expand(ExpandArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Weights(_) => "weights",
            Command::Curvature(_) => "curvature",
            Command::Solve(_) => "solve",
            Command::Sweep(_) => "sweep",
            Command::Koiso(_) => "koiso",
            Command::Schauder(_) => "schauder",
            Command::Expand(_) => "expand",
        }
    }

    /// Flags that were given, as configuration entries.
    pub fn flags(&self) -> KeyValues {
        let mut kv = KeyValues::default();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                kv.set(k, &v);
            }
        };
        let s = |v: &Option<f64>| v.map(|x| x.to_string());
        let u = |v: &Option<usize>| v.map(|x| x.to_string());
        match self {
            Command::Weights(a) => {
                put("n", u(&a.n));
                put("ranks", a.ranks.clone());
                put("mu0", s(&a.mu0));
                put("mus", a.mus.clone());
                put("K", s(&a.k));
                put("delta_min", s(&a.delta_min));
            }
            Command::Curvature(a) => {
                put("n", u(&a.n));
                put("samples", u(&a.samples));
                put("step", s(&a.step));
                put("tol", s(&a.tol));
                put("seed", a.seed.map(|v| v.to_string()));
                put("perturb", s(&a.perturb));
            }
            Command::Solve(a) | Command::Sweep(a) => {
                put("kind", a.chart.clone());
                put("n", u(&a.n));
                put("f", u(&a.f));
                put("h_u", a.h_u.clone());
                put("K", s(&a.k));
                put("weights", a.weights.clone());
                put("eps", a.eps.clone());
                put("spacing", s(&a.spacing));
                put("rtol", s(&a.rtol));
                if a.allow_indefinite {
                    put("allow_indefinite", Some("true".into()));
                }
            }
            Command::Koiso(a) => {
                put("n", u(&a.n));
                put("refine", u(&a.refine));
                put("seeds", u(&a.seeds));
                put("seed", a.seed.map(|v| v.to_string()));
                put("K", s(&a.k));
            }
            Command::Schauder(a) => {
                put("eps", a.eps.clone());
                put("per_axis", u(&a.per_axis));
            }
            Command::Expand(a) => {
                put("n", u(&a.n));
                put("stages", u(&a.stages));
                put("seed", a.seed.map(|v| v.to_string()));
                put("qhat_norm", s(&a.qhat_norm));
                put("knots", u(&a.knots));
                put("step", s(&a.step));
            }
        }
        kv
    }
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Cusp ranks, comma separated.
    #[arg(long)]
    pub ranks: Option<String>,
    /// Fix `mu0` instead of choosing it.
    #[arg(long)]
    pub mu0: Option<f64>,
    /// Cusp weights, comma separated; needs `--mu0`.
    #[arg(long)]
    pub mus: Option<String>,
    #[arg(long = "K", alias = "k", allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long = "delta-min")]
    pub delta_min: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Random points per chart kind.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Conformal perturbation amplitude; any nonzero value should fail.
    #[arg(long)]
    pub perturb: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// `cusp`, `maximal` or `collar`.
    #[arg(long)]
    pub chart: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub f: Option<usize>,
    #[arg(long = "h-u")]
    pub h_u: Option<String>,
    #[arg(long = "K", alias = "k", allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// `auto` or `mu0,mu1`.
    #[arg(long)]
    pub weights: Option<String>,
    /// One value for `solve`, a decreasing list for `sweep`.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Fall back to direct elimination when the operator is indefinite.
    #[arg(long)]
    pub allow_indefinite: bool,
}

#[derive(Debug, Args)]
pub struct KoisoArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of grid levels, starting at 17 nodes per axis.
    #[arg(long)]
    pub refine: Option<usize>,
    /// Number of random tensors.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// First seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "K", alias = "k", allow_negative_numbers = true)]
    pub k: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SchauderArgs {
    #[arg(long)]
    pub eps: Option<String>,
    /// Lattice values per axis.
    #[arg(long = "per-axis")]
    pub per_axis: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub stages: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sup norm of the boundary perturbation.
    #[arg(long = "qhat-norm")]
    pub qhat_norm: Option<f64>,
    #[arg(long)]
    pub knots: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
}
