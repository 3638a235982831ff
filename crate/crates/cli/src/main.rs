//! `ugpf`: command-line front end for Unique Games partition functions.
//!
//! Exit codes: 0 success (or a yes-side verdict from `decide`), 1 no-side
//! verdict, 2 invalid input or parameters, 3 budget exceeded, 4 strict
//! condition check failed, 5 inconclusive verdict, 6 numerical failure.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod render;

use render::Format;

#[derive(Parser, Debug)]
#[command(name = "ugpf", version, about = "Partition functions and Count Unique Games decisions")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "UGPF_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Largest k^n enumerated by brute force.
    #[arg(long, global = true)]
    pub max_colorings: Option<u64>,
    /// Largest number of edge subsets visited by the subgraph expansion.
    #[arg(long, global = true)]
    pub max_subsets: Option<u64>,
    #[arg(long, global = true)]
    pub max_polymers: Option<u64>,
    #[arg(long, global = true)]
    pub max_clusters: Option<u64>,
    /// Largest number of Taylor terms used by interpolation.
    #[arg(long, global = true)]
    pub max_interp_terms: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random regular instance, optionally with a planted assignment.
    Gen(GenArgs),
    /// Parse an instance and report its shape.
    Validate(InstanceArg),
    /// Exact instance value by enumerating colorings.
    Value(InstanceArg),
    /// Evaluate log Z(G; w).
    Eval(EvalArgs),
    /// Exact coefficient vectors of Z.
    Coeffs(CoeffsArgs),
    /// Decide a Count Unique Games promise problem.
    Decide(DecideArgs),
    /// Constants and numeric checks behind the zero-free region.
    #[command(subcommand)]
    Zerofree(ZerofreeCommand),
    /// Potts tree thresholds w_u and w_o.
    Phase(PhaseArgs),
    /// Time the exact and approximate routines on growing instances.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct InstanceArg {
    /// Instance file, or `-` for stdin.
    pub instance: String,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    /// Vertex degree.
    #[arg(long)]
    pub delta: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Plant an assignment satisfying at least a 1 − eps fraction of edges.
    #[arg(long)]
    pub planted: bool,
    /// Violated fraction for `--planted`, as a decimal or `p/q`.
    #[arg(long, default_value = "0")]
    pub eps: String,
    /// Output path, or `-` for stdout.
    #[arg(long, short, default_value = "-")]
    pub out: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    Brute,
    Subgraph,
    Cluster,
    Interp,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    pub instance: String,
    /// Edge activity, e.g. `2`, `1.5+0.5i`.
    #[arg(long, allow_hyphen_values = true)]
    pub w: String,
    #[arg(long, value_enum, default_value_t = EvalMethod::Brute)]
    pub method: EvalMethod,
    /// Target additive error on log Z for the approximate methods.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    /// Zero-free radius around [1, w] for interpolation; located from the
    /// roots of Z when omitted.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Fail with exit code 4 when the cluster-expansion hypotheses do not hold.
    #[arg(long)]
    pub strict: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffKind {
    /// Histogram of satisfied-edge counts: Z = Σ c_i w^i.
    Sat,
    /// Subgraph expansion: Z = Σ a_j (w − 1)^j.
    Subgraph,
}

#[derive(Args, Debug)]
pub struct CoeffsArgs {
    pub instance: String,
    #[arg(long, value_enum, default_value_t = CoeffKind::Sat)]
    pub kind: CoeffKind,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecideMethod {
    Exact,
    Cluster,
    Interp,
}

#[derive(Args, Debug)]
pub struct DecideArgs {
    pub instance: String,
    #[arg(long)]
    pub f: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = DecideMethod::Exact)]
    pub method: DecideMethod,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    /// Activity; defaults to exp(1.5 × threshold).
    #[arg(long)]
    pub w: Option<f64>,
    /// Zero-free radius for `--method interp`.
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum ZerofreeCommand {
    /// The constants (c, angle_alpha, θ, angle_eps, η, w*).
    Constants(KDelta),
    /// The small-k table of (c_k, α_k).
    Table(TableArgs),
    /// The eighteen-problem derivative bound.
    Pbound(KDeltaD),
    /// Sample the forward invariant of the ratio recurrence.
    Invariant(InvariantArgs),
}

#[derive(Args, Debug)]
pub struct KDelta {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub delta: usize,
}

#[derive(Args, Debug)]
pub struct KDeltaD {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub delta: usize,
    #[arg(long)]
    pub d: usize,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long, default_value_t = 3)]
    pub k_min: usize,
    #[arg(long, default_value_t = 12)]
    pub k_max: usize,
}

#[derive(Args, Debug)]
pub struct InvariantArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub delta: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    U,
    O,
    Both,
}

#[derive(Args, Debug)]
pub struct PhaseArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub delta: usize,
    #[arg(long, value_enum, default_value_t = Which::Both)]
    pub which: Which,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Largest vertex count.
    #[arg(long, default_value_t = 10)]
    pub max_n: usize,
    #[arg(long, default_value_t = 3)]
    pub delta: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads(cli.global.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: usize) -> Result<(), String> {
    Ok(())
}
