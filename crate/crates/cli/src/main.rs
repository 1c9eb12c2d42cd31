use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod io;

use io::CliError;

const EXIT_DOMAIN: u8 = 3;
const EXIT_FAILED: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "permsoup", version, about = "α-permanents and Markov loop soups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// α-permanent of the block matrix A[q] as a polynomial in α.
    Perm(PermArgs),
    /// Crossing matrices T_q of a *-forest with their coefficients.
    Tq(TqArgs),
    /// Coefficientwise check of det(I - ZA)^{-α} against block permanents.
    SeriesCheck(SeriesArgs),
    /// Determinant, loop mass, Green function and related data of a chain.
    ChainInfo(ChainArgs),
    /// Draw loop soups and write them as newline-delimited JSON.
    SoupSample(SampleArgs),
    /// Compare the occupation law of sampled soups with the exact law.
    SoupVerify(VerifyArgs),
    /// Compare cascade and soup crossing laws with the exact law.
    CascadeVerify(CascadeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Pretty,
    Json,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Matrix JSON file: {"d", "mode", "entries", optional "labels"}.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "pretty")]
    pub format: Format,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PermArgs {
    #[command(flatten)]
    pub io: Common,
    /// Block sizes, e.g. 1,2,1. Defaults to all ones.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<u32>>,
    /// Evaluate at this α: a rational like 1/2 or a decimal like 0.5.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Skip the *-forest closed form.
    #[arg(long)]
    pub force_brute: bool,
    /// Largest |q| handled by permutation enumeration.
    #[arg(long, default_value_t = permsoup::permanent::DEFAULT_BRUTE_CAP)]
    pub cap: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TqArgs {
    #[command(flatten)]
    pub io: Common,
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<u32>>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub io: Common,
    #[arg(long)]
    pub alpha: String,
    /// Coefficient box, one cap per variable. Defaults to 2 for each.
    #[arg(long, value_delimiter = ',')]
    pub cap: Option<Vec<u32>>,
    #[arg(long, default_value_t = permsoup::permanent::DEFAULT_BRUTE_CAP)]
    pub brute_cap: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ChainArgs {
    #[command(flatten)]
    pub io: Common,
    /// Vertex ordering (1-based) for the determinant factorisation.
    #[arg(long, value_delimiter = ',')]
    pub ordering: Option<Vec<usize>>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Sampling {
    /// Positive α, rational or decimal.
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Base seed. A fresh one is generated and reported when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub io: Common,
    #[command(flatten)]
    pub sampling: Sampling,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    /// Visit counts θ.
    Theta,
    /// Crossing counts N.
    Crossing,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Thresholds {
    /// Outcomes listed individually are those with q inside this box...
    #[arg(long, value_delimiter = ',')]
    pub qcap: Option<Vec<u32>>,
    /// ...or, without --qcap, those with |q| at most this.
    #[arg(long, default_value_t = 8)]
    pub max_total: u32,
    #[arg(long, default_value_t = 1e-3)]
    pub min_probability: f64,
    #[arg(long, default_value_t = 4.0)]
    pub z_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub min_p_value: f64,
    #[arg(long, default_value_t = permsoup::permanent::DEFAULT_BRUTE_CAP)]
    pub brute_cap: usize,
    /// Also write (outcome, theory, empirical) rows as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub io: Common,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub thresholds: Thresholds,
    #[arg(long, value_enum, default_value = "theta")]
    pub law: Law,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CascadeArgs {
    #[command(flatten)]
    pub io: Common,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub thresholds: Thresholds,
    /// Cascade root (1-based) for its component.
    #[arg(long, default_value_t = 1)]
    pub root: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Perm(a) => commands::perm(a),
        Command::Tq(a) => commands::tq(a),
        Command::SeriesCheck(a) => commands::series_check(a),
        Command::ChainInfo(a) => commands::chain_info(a),
        Command::SoupSample(a) => commands::soup_sample(a),
        Command::SoupVerify(a) => commands::soup_verify(a),
        Command::CascadeVerify(a) => commands::cascade_verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DOMAIN)
        }
    }
}
