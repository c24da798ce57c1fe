//! `quadgraph`: experiments on leaves of shifted squaring maps over prime fields.
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 usage or validation
//! error.

mod commands;
mod failure;
mod plot;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use failure::Failure;
use quadgraph::census::DEFAULT_BUDGET;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "quadgraph", version, about = "Leaf counts of functional graphs of X^2 + a over prime fields")]
pub struct Cli {
    /// Maximum number of worker threads.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,

    /// Work budget in kernel vertex visits (families times p).
    #[arg(long, global = true, env = "QUADGRAPH_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count the leaves of one family.
    Leaves(LeavesArgs),
    /// Histogram of leaf counts over all families of a given size.
    Census(CensusArgs),
    /// Greedy leafless family construction.
    Cover(CoverArgs),
    /// Distribution of the normalized three-map deviation.
    Dist(DistArgs),
    /// Render a CSV produced by census or dist as SVG.
    Plot(PlotArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
    /// Basic facts about F_p.
    FieldInfo(FieldInfoArgs),
}

#[derive(Args, Debug)]
pub struct LeavesArgs {
    #[arg(long)]
    pub p: u64,
    /// Comma-separated, pairwise distinct.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub shifts: Vec<u64>,
    /// Run both kernels and require equal counts.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Args, Debug)]
pub struct PrimeSelection {
    /// A single prime.
    #[arg(long, conflicts_with_all = ["pmin", "pmax"], required_unless_present = "pmax")]
    pub p: Option<u64>,
    /// Lower end of a prime range (default 3).
    #[arg(long, requires = "pmax")]
    pub pmin: Option<u64>,
    /// Upper end of a prime range.
    #[arg(long)]
    pub pmax: Option<u64>,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to a file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Brute,
    Reduced,
    /// Brute force within budget, else reduced.
    Auto,
    /// Both, checking that they agree.
    Both,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[command(flatten)]
    pub primes: PrimeSelection,
    /// Family size.
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto, conflicts_with = "sample")]
    pub method: MethodArg,
    /// Merge every leaf count >= T into one row.
    #[arg(long, default_value_t = quadgraph::census::DEFAULT_BUCKET)]
    pub bucket: u64,
    #[arg(long, conflicts_with = "bucket")]
    pub no_bucket: bool,
    /// Estimate from this many uniformly random families.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub sample: Option<u64>,
    #[arg(long, default_value_t = 0, requires = "sample")]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CoverArgs {
    #[command(flatten)]
    pub primes: PrimeSelection,
    /// Add the largest family sizes guaranteed to have a leaf.
    #[arg(long)]
    pub check_thresholds: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = quadgraph::dist::DEFAULT_BINS as u64, value_parser = clap::value_parser!(u64).range(1..1_000_000))]
    pub bins: u64,
    /// Estimate from this many uniformly random ordered triples.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub sample: Option<u64>,
    #[arg(long, default_value_t = 0, requires = "sample")]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// Minimum and maximum leaf counts against p.
    Minmax,
    /// Natural log of N_k against p, one line per k.
    Lognum,
    /// Proportion of each leaf count as stacked bars.
    Stacked,
    /// Delta histogram with the semicircle overlay.
    Hist,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteArg {
    ClosedForms,
    Bounds,
    Orbit,
    Covers,
    Dist,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 61)]
    pub pmax: u64,
}

#[derive(Args, Debug)]
pub struct FieldInfoArgs {
    #[arg(long)]
    pub p: u64,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        pool = pool.num_threads(w as usize);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::usage(format!("cannot start worker pool: {e}")))?;
    let budget = cli.budget;
    pool.install(|| match cli.command {
        Command::Leaves(a) => commands::leaves(&a),
        Command::Census(a) => commands::census(&a, budget),
        Command::Cover(a) => commands::cover(&a),
        Command::Dist(a) => commands::dist(&a, budget),
        Command::Plot(a) => plot::plot(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::FieldInfo(a) => commands::field_info(&a),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
