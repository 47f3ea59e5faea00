//! `kinlab`: command-line driver for exponent checks, norms, free transport,
//! bilinear bound sampling, Picard runs, scattering and the wave operator.
//!
//! Exit codes: 0 success, 1 validation or input error, 2 non-convergence.

mod commands;
mod config;
mod data;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    /// Outputs were written but the Picard iteration did not converge.
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => 1,
            Self::NotConverged(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "kinlab", version, about = "Cut-off soft-potential Boltzmann laboratory")]
pub struct Cli {
    /// Worker threads for internal parallelism (default: all available).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

const RUN_HELP: &str = "\
Config file (INI; every key optional):
  [grid]       N, L, n_x, v_max, n_v
  [kernel]     gamma, b0, angular_nodes, epsilon
  [solver]     T, dt, picard_tol, max_iters, q, r, p, a, interpolation
  [experiment] data, seed, snapshot_every, scatter_tol, max_horizon

Data specs (--data or [experiment] data): kind[:key=value,...], vectors as a;b
  gaussian:amp,x0,v0,sx,sv   two-stream:amp,x0,u,sx,sv   maxwellian:rho,u,T
  random:amp (uses --seed)   snapshot:path

Output files in --out:
  traces.csv   t,norm_a,norm_rp        (L^a and L^r_x L^p_v norms per snapshot)
  picard.csv   iter,delta,ratio        (sup-in-time L^a iterate distances)
  defect.csv   t,defect                (scatter only: ||U(-t)f(t) - f+||_{L^a})
  f_plus.csv                           (scatter only: f+, time stamp = horizon used)
  f0.csv                               (wave only: recovered initial data)
  snapshots/f_<step>.csv               (JSON header line, then ix..,iv..,value)
  summary.json                         (resolved configuration and results)";

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Checks a triplet (q, r, p) against the kinetic admissibility window.
    #[command(after_help = "Output: JSON {admissible, is_endpoint, violated_conditions, a, inv_a}.")]
    Admissible(AdmissibleArgs),
    /// Lists the lattice points of the feasible (1/p, 1/r) region.
    #[command(after_help = "Output: CSV inv_p,inv_r,inv_q,a (exact rationals; a as an exponent).")]
    Region(RegionArgs),
    /// Mixed norms of one or more snapshots.
    #[command(after_help = "Output: JSON {q, r, p, a, snapshots: [{path, t, norm_rp, norm_a}], time_norm}.\n\
time_norm is the trapezoid L^q_t norm of norm_rp over the snapshot times (null for one snapshot).")]
    Norm(NormArgs),
    /// Applies the free-streaming operator to a snapshot.
    #[command(after_help = "Output: snapshot file (JSON header line, then CSV ix..,iv..,value) at time t_in + t.")]
    Stream(StreamArgs),
    /// Samples the gain/loss bilinear bound ratio over random pairs.
    #[command(
        name = "verify-bounds",
        after_help = "Output: JSON {which, dim, gamma, p_v, q_v, r_v, samples, seed, levels: [{n_v, max_ratio, mean_ratio, ratios}], relative_change}."
    )]
    VerifyBounds(VerifyArgs),
    /// Picard iteration of the mild formulation.
    #[command(after_help = RUN_HELP)]
    Simulate(RunArgs),
    /// Forward run with the scattering state and defect trace.
    #[command(after_help = RUN_HELP)]
    Scatter(RunArgs),
    /// Backward Picard iteration recovering f0 from a scattering state.
    #[command(after_help = RUN_HELP)]
    Wave(WaveArgs),
}

#[derive(Debug, Args)]
pub struct AdmissibleArgs {
    #[arg(long = "N")]
    pub dim: u32,
    #[arg(long)]
    pub q: String,
    #[arg(long)]
    pub r: String,
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long = "N")]
    pub dim: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: String,
    /// equality | strict
    #[arg(long, default_value = "equality")]
    pub mode: String,
    #[arg(long, default_value_t = kinlab::exponents::DEFAULT_DENOMINATOR)]
    pub denominator: i64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Snapshot file; repeat for a time trace.
    #[arg(long, required = true)]
    pub snapshot: Vec<PathBuf>,
    #[arg(long)]
    pub q: String,
    #[arg(long)]
    pub r: String,
    #[arg(long)]
    pub p: String,
    /// Container exponent (default: harmonic mean of p and r).
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub t: String,
    #[arg(long)]
    pub out: PathBuf,
    /// linear | cubic | monotone_cubic | spectral
    #[arg(long, default_value = "cubic")]
    pub interpolation: String,
    /// Apply the adjoint U(t)* instead of U(t).
    #[arg(long)]
    pub adjoint: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// gain | loss
    #[arg(long)]
    pub which: String,
    #[arg(long = "N")]
    pub dim: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: String,
    #[arg(long)]
    pub pv: String,
    #[arg(long)]
    pub qv: String,
    #[arg(long)]
    pub rv: String,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// Comma-separated velocity resolutions, e.g. 16,32.
    #[arg(long, value_delimiter = ',', default_value = "16,32")]
    pub resolutions: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4.0)]
    pub v_max: f64,
    #[arg(long, default_value_t = 16)]
    pub angular_nodes: usize,
    #[arg(long, default_value_t = 1.0)]
    pub b0: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Initial data spec (overrides [experiment] data).
    #[arg(long)]
    pub data: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for randomised data (overrides [experiment] seed).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct WaveArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Scattering state snapshot, e.g. f_plus.csv from `scatter`. Its time
    /// stamp is the horizon the scattering integral was accumulated over.
    #[arg(long)]
    pub fplus: PathBuf,
    /// Backward horizon (default: the snapshot time stamp if positive,
    /// otherwise [solver] T).
    #[arg(long)]
    pub horizon: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads {n}: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
