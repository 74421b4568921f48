use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdopt_core::{CouplingScale, Direction};

#[derive(Debug, Parser)]
#[command(name = "qdopt", version, about = "Quantum-inspired discrete optimization toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem file and print the best configuration found.
    Solve(SolveArgs),
    /// Fit a factorization surrogate or an RBM to a dataset CSV.
    Fit(FitArgs),
    /// Turn a surrogate model file into a problem file.
    Compile(CompileArgs),
    /// Fit, compile, solve and rank candidates in one pass.
    Optimize(OptimizeArgs),
    /// Draw samples from the relaxation or from an RBM.
    #[command(subcommand)]
    Sample(SampleCommand),
    /// Generate a random problem instance or a synthetic dataset.
    Gen(GenArgs),
    /// Compare bSB and simulated annealing on a large MAX-CUT instance.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Bsb,
    Sa,
    Random,
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse().map_err(|e: qdopt_core::Error| e.to_string())
}

fn parse_c0(s: &str) -> Result<CouplingScale, String> {
    if s == "auto" {
        return Ok(CouplingScale::Auto);
    }
    s.parse::<f64>()
        .map(CouplingScale::Fixed)
        .map_err(|_| format!("expected `auto` or a number, got `{s}`"))
}

#[derive(Debug, Clone, Args)]
pub struct BsbFlags {
    /// Final value of the control a(t) and the x-update scale.
    #[arg(long, default_value_t = 1.0)]
    pub a0: f64,
    /// Coupling scale: `auto` or a positive number.
    #[arg(long, default_value = "auto", value_parser = parse_c0)]
    pub c0: CouplingScale,
    /// Integration time step.
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    /// Integration steps per restart.
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SaFlags {
    /// Annealing sweeps per restart.
    #[arg(long, default_value_t = 500)]
    pub sweeps: usize,
    /// Initial inverse temperature.
    #[arg(long, default_value_t = 0.1)]
    pub beta_initial: f64,
    /// Final inverse temperature.
    #[arg(long, default_value_t = 10.0)]
    pub beta_final: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FitFlags {
    /// Surrogate rank K.
    #[arg(long, default_value_t = 8)]
    pub rank: usize,
    /// Gradient-descent learning rate.
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 5000)]
    pub epochs: usize,
    /// Initial coefficients are drawn from Uniform(-s, s).
    #[arg(long, default_value_t = 0.01)]
    pub init_scale: f64,
    /// Fraction of rows held out for model selection.
    #[arg(long, default_value_t = 0.2)]
    pub val_fraction: f64,
    #[arg(long, default_value_t = 0.0)]
    pub weight_decay: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem file (`ising N` or `qubo N [min|max]`).
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Bsb)]
    pub algo: Algo,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent restarts (bsb, sa).
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    #[command(flatten)]
    pub bsb: BsbFlags,
    #[command(flatten)]
    pub sa: SaFlags,
    /// Random configurations tried by `--algo random`.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Also report the cut, reading the problem as a MAX-CUT instance with J = w/2.
    #[arg(long)]
    pub cut: bool,
    /// Write the per-step trace of the winning bSB restart as CSV.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Fm,
    Rbm,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset CSV with header `b0,...,b{n-1},target[,...]`.
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelKind::Fm)]
    pub kind: ModelKind,
    /// Direction in which targets improve (fm).
    #[arg(long, default_value = "max", value_parser = parse_direction)]
    pub direction: Direction,
    /// Comma-separated weights, one per target column (fm).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Vec<f64>,
    #[command(flatten)]
    pub fm: FitFlags,
    /// Hidden units (rbm).
    #[arg(long, default_value_t = 8)]
    pub hidden: usize,
    /// Gibbs steps per CD update (rbm).
    #[arg(long, default_value_t = 1)]
    pub cd_k: usize,
    /// CD learning rate (rbm).
    #[arg(long, default_value_t = 0.01)]
    pub cd_lr: f64,
    /// CD updates (rbm).
    #[arg(long, default_value_t = 2000)]
    pub updates: usize,
    /// Minibatch size (rbm).
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the model here instead of standard output.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Surrogate model JSON written by `fit --kind fm`.
    pub model: PathBuf,
    /// Emit the compiled Ising problem (ancilla at spin 0) instead of the QUBO.
    #[arg(long)]
    pub ising: bool,
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Dataset CSV with header `b0,...,b{n-1},target[,...]`.
    pub dataset: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Vec<f64>,
    #[arg(long, default_value = "max", value_parser = parse_direction)]
    pub direction: Direction,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// RBM model JSON used to drop implausible candidates.
    #[arg(long, value_name = "FILE")]
    pub rbm_model: Option<PathBuf>,
    /// Fraction of candidates kept by the RBM filter.
    #[arg(long, default_value_t = 0.5)]
    pub keep_fraction: f64,
    #[command(flatten)]
    pub fit: FitFlags,
    #[command(flatten)]
    pub bsb: BsbFlags,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum SampleCommand {
    /// CSV of `u,zeta` draws, or `q,rho,zeta` when `--q` is given.
    Relax(RelaxArgs),
    /// CSV of visible vectors from block Gibbs chains.
    Rbm(RbmSampleArgs),
}

#[derive(Debug, Args)]
pub struct RelaxArgs {
    #[arg(long, default_value_t = 8.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    /// Use the reparametrized sampler at this Bernoulli mean.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RbmSampleArgs {
    /// RBM model JSON.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Ising,
    Qubo,
    Maxcut,
    Dataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    Quadratic,
    SparseQuadratic,
    Onemax,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Number of spins, bits or vertices.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Probability that a pair gets a coupling or an edge.
    #[arg(long, default_value_t = 1.0)]
    pub density: f64,
    /// MAX-CUT: the unit-weight n-cycle.
    #[arg(long)]
    pub cycle: bool,
    /// MAX-CUT: edge weights ±1 instead of 1.
    #[arg(long)]
    pub signed: bool,
    /// QUBO direction.
    #[arg(long, default_value = "min", value_parser = parse_direction)]
    pub direction: Direction,
    /// Dataset: property oracle.
    #[arg(long, value_enum, default_value_t = OracleArg::Quadratic)]
    pub oracle: OracleArg,
    /// Dataset: number of rows.
    #[arg(long, default_value_t = 1000)]
    pub rows: usize,
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Vertices of the complete ±1-weighted graph.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// bSB steps; SA runs the same number of sweeps.
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    /// Solver seeds 0..seeds.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub instance_seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub a0: f64,
    #[arg(long, default_value = "auto", value_parser = parse_c0)]
    pub c0: CouplingScale,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    /// SA initial inverse temperature; defaults to ln 2 over the mean |ΔE| from a random start.
    #[arg(long)]
    pub sa_beta_initial: Option<f64>,
    /// SA final inverse temperature; defaults to 6 over the cheapest uphill move 4·min|J|.
    #[arg(long)]
    pub sa_beta_final: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}
