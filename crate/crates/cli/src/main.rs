mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crystal_forge::semilinear::PivotRule;

#[derive(Parser)]
#[command(
    name = "crystal-forge",
    version,
    about = "Adequate filtrations, refined Hasse invariants and canonical-subgroup degrees of Dieudonné data over truncated valuation rings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a module document.
    Gen {
        #[command(subcommand)]
        recipe: Recipe,
    },
    /// Check the crystal axioms of a module.
    Validate(ValidateArgs),
    /// Build and verify an adequate filtration.
    Filtration(FiltrationArgs),
    /// Refined partial Hasse invariants, graded sections and μ-ordinary Hasse invariants.
    Invariants(InvariantsArgs),
    /// Dual module with the duality checks.
    Dual(DualArgs),
    /// Codegrees of a quotient crystal and the degree theorem.
    Canonical(CanonicalArgs),
    /// Random corpus with link, duality and uniqueness checks.
    Fuzz(FuzzArgs),
}

#[derive(Args, Clone)]
struct CtxArgs {
    #[arg(long)]
    p: u32,
    #[arg(long, default_value_t = 1)]
    f: u32,
    /// Precision: elements live in F_q[s]/(s^N).
    #[arg(long = "N", env = "CRYSTAL_FORGE_N", default_value_t = 24)]
    n: u32,
    /// Defining polynomial of F_q, ascending coefficients including the leading 1.
    #[arg(long, value_delimiter = ',')]
    modulus: Option<Vec<u32>>,
}

#[derive(Subcommand)]
enum Recipe {
    /// The split μ-ordinary datum of type d.
    MuOrdinary {
        #[command(flatten)]
        ctx: CtxArgs,
        #[arg(long)]
        h: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// A random datum with Hodge and conjugate summands in near-special position.
    Random {
        #[command(flatten)]
        ctx: CtxArgs,
        #[arg(long)]
        h: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Apply a random change of basis to a module.
    Gauge {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Move every Hodge basis by a random matrix with entries of valuation ≥ 1/p.
    Perturb {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The f = 1, h = 2 datum with Hasse invariant s^c.
    Classical {
        #[arg(long)]
        p: u32,
        #[arg(long = "N", env = "CRYSTAL_FORGE_N", default_value_t = 24)]
        n: u32,
        /// Valuation of the Hasse invariant in digits (at least N/p).
        #[arg(long)]
        c: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// A sum of rank-two Hasse blocks; --quotient writes the projection onto
    /// their rank-one quotients.
    HasseChain {
        #[command(flatten)]
        ctx: CtxArgs,
        /// Digit valuations of the block parameters, f per block, blocks separated by ';'.
        #[arg(long)]
        c: String,
        #[arg(long)]
        quotient: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Output file (default: standard output).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pivot {
    First,
    Last,
}

impl From<Pivot> for PivotRule {
    fn from(p: Pivot) -> Self {
        match p {
            Pivot::First => PivotRule::First,
            Pivot::Last => PivotRule::Last,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Rotate the seed embeddings used at each filtration level.
    #[arg(long, default_value_t = 0)]
    seed_shift: usize,
    #[arg(long, value_enum, default_value_t = Pivot::First)]
    pivot: Pivot,
}

#[derive(Args)]
struct ValidateArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FiltrationArgs {
    input: PathBuf,
    #[command(flatten)]
    build: BuildArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct InvariantsArgs {
    input: PathBuf,
    /// Use a stored filtration instead of building one.
    #[arg(long)]
    filtration: Option<PathBuf>,
    #[command(flatten)]
    build: BuildArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct DualArgs {
    input: PathBuf,
    #[command(flatten)]
    build: BuildArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CanonicalArgs {
    input: PathBuf,
    /// Quotient document: {"rank": δ, "proj": [matrix per embedding]}.
    quotient: PathBuf,
    #[arg(long)]
    filtration: Option<PathBuf>,
    #[command(flatten)]
    build: BuildArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
