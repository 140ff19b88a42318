//! `poa`: principal observable analysis from the command line.
//!
//! Exit status: 0 on success, 1 when a stability audit fails, 2 on any
//! input or processing error.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use poa_core::{ConstraintMode, SolverConfig};

use crate::input::Format;

#[derive(Parser)]
#[command(
    name = "poa",
    version,
    about = "Principal observable analysis of finite metric-measure spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute principal observables; writes po.csv and poa.json.
    Poa(RunArgs),
    /// POA embedding in (R^k, L-infinity); writes embedding.csv and distortion.json.
    Embed(RunArgs),
    /// Classical MDS baseline in (R^k, L2); writes mds_embedding.csv and mds_distortion.json.
    Mds(RunArgs),
    /// POA and MDS distortion histograms over shared bins; writes comparison.json.
    Distort(RunArgs),
    /// McShane-Whitney extension to query points; writes extension.csv.
    Extend(ExtendArgs),
    /// Observable-domain signal analysis and synthesis.
    Signal {
        #[command(subcommand)]
        action: SignalCommand,
    },
    /// Wasserstein-1 and stability audits between two measures; writes stability.json.
    Stability(StabilityArgs),
}

#[derive(Subcommand)]
enum SignalCommand {
    /// Coefficients of a signal in the observable basis; writes spectrum.csv.
    Analyze(AnalyzeArgs),
    /// Rebuild a signal from a spectrum using the constant term and k observables; writes signal.txt.
    Synthesize(SynthesizeArgs),
}

#[derive(Args, Clone)]
struct DatasetArgs {
    /// Edge list (`i j w` per line) or distance-matrix CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "edge-list")]
    format: Format,
    /// One weight per line; uniform when omitted.
    #[arg(long, alias = "mu")]
    measure: Option<PathBuf>,
    /// Check the triangle inequality on distance CSV input.
    #[arg(long)]
    validate: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Pairwise,
    Edges,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Number of principal observables (or embedding dimension).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, default_value_t = SolverConfig::default().restarts)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Lipschitz constraints on all pairs or on graph edges only.
    #[arg(long, value_enum, default_value = "pairwise")]
    mode: ModeArg,
    #[arg(long, default_value_t = SolverConfig::default().max_ccp_iters)]
    max_iters: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            restarts: self.restarts,
            seed: self.seed,
            max_ccp_iters: self.max_iters,
            constraint_mode: match self.mode {
                ModeArg::Pairwise => ConstraintMode::Pairwise,
                ModeArg::Edges => ConstraintMode::Edges,
            },
            ..SolverConfig::default()
        }
    }

    fn k(&self) -> usize {
        self.k as usize
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Also write SVG scatter plots of the embeddings.
    #[arg(long)]
    svg: bool,
    /// Histogram bins for distortion reports.
    #[arg(long, default_value_t = poa_core::embedding::DEFAULT_BINS)]
    bins: usize,
}

#[derive(Args)]
struct ExtendArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Query-distance CSV: one row per query, one column per sample point.
    #[arg(long)]
    queries: PathBuf,
    /// Sample values, one per line. Defaults to the first principal observable of the input.
    #[arg(long)]
    values: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Signal values, one per line.
    #[arg(long)]
    signal: PathBuf,
    /// Principal observables from an earlier `poa` run, instead of solving again.
    #[arg(long)]
    po: Option<PathBuf>,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Spectrum CSV with `index,coefficient` columns.
    #[arg(long)]
    spectrum: PathBuf,
    #[arg(long)]
    po: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Second measure, one weight per line.
    #[arg(long)]
    nu: PathBuf,
    /// Random Lipschitz-polytope vertices added to the audited families.
    #[arg(long, default_value_t = 50)]
    random: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Poa(a) => commands::poa(&a.data, &a.solver),
        Command::Embed(a) => commands::embed(&a.data, &a.solver, a.bins, a.svg),
        Command::Mds(a) => commands::mds(&a.data, &a.solver, a.bins, a.svg),
        Command::Distort(a) => commands::distort(&a.data, &a.solver, a.bins, a.svg),
        Command::Extend(a) => commands::extend(&a.data, &a.solver, &a.queries, a.values.as_deref()),
        Command::Signal { action } => match action {
            SignalCommand::Analyze(a) => commands::analyze(&a.data, &a.solver, &a.signal, a.po.as_deref()),
            SignalCommand::Synthesize(a) => commands::synthesize(&a.data, &a.solver, &a.spectrum, a.po.as_deref()),
        },
        Command::Stability(a) => commands::stability(&a.data, &a.solver, &a.nu, a.random),
    };
    match result {
        Ok(commands::Status::Success) => ExitCode::SUCCESS,
        Ok(commands::Status::AuditFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
