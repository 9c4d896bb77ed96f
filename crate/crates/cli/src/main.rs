//! `qcoupling`: certification runs, sweeps, figure data, Chernoff and
//! quantile-transform queries.
//!
//! Exit status: 0 when every certified claim holds, 1 on a certified
//! violation, 2 when a claim stayed undecidable at the maximum precision,
//! 3 on usage errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qcoupling::numerics::{DEFAULT_PRECISION, MAX_PRECISION};

use output::Format;

#[derive(Parser, Debug)]
#[command(
    name = "qcoupling",
    version,
    about = "Certified numerics for the binomial-Gaussian quantile coupling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Starting precision in bits.
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: u32,
    /// Largest precision tried before a claim is declared undecidable.
    #[arg(long, default_value_t = MAX_PRECISION)]
    pub max_precision: u32,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify the weak and sharp inequalities for every even m up to --m-max.
    Verify(VerifyArgs),
    /// Evaluate Delta for every even m up to --m-max.
    Sweep(SweepArgs),
    /// Emit the data of the quantile-transform picture (1) or the blow-up error picture (2).
    Figure(FigureArgs),
    /// Chernoff function and Gaussian coupling of a law.
    Chernoff(ChernoffArgs),
    /// Quantile transform Psi_m with its classical and sharpened margins.
    Psi(PsiArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, conflicts_with = "m")]
    pub m_max: Option<u32>,
    /// A single even m instead of a range.
    #[arg(long)]
    pub m: Option<u32>,
    /// A single k; needs --m.
    #[arg(long, requires = "m")]
    pub k: Option<u32>,
    /// Override of the upper bound on Delta (default 1.036).
    #[arg(long, hide = true)]
    pub delta_upper: Option<String>,
    /// Override of the lower bound on Delta (default 0).
    #[arg(long, hide = true)]
    pub delta_lower: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub m_max: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    /// Which picture: 1 or 2.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=2))]
    pub which: u8,
    /// Walk length for picture 1.
    #[arg(long, default_value_t = 50)]
    pub m: u32,
    /// Largest walk length for picture 2.
    #[arg(long, default_value_t = 1000)]
    pub m_max: u32,
    /// Spacing of the limit curve in picture 1.
    #[arg(long, default_value_t = 0.001)]
    pub grid_step: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ChernoffArgs {
    /// rademacher, normal, bernoulli:<p> or poisson:<lambda>.
    #[arg(long)]
    pub dist: String,
    /// Points above the mean; repeat the flag for several.
    #[arg(long, required = true, allow_hyphen_values = true)]
    pub x: Vec<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct PsiArgs {
    #[arg(long)]
    pub m: u32,
    /// Gaussian values; when absent, a grid of spacing --grid-step on
    /// [-3 sqrt(m), 3 sqrt(m)] is used.
    #[arg(long, allow_hyphen_values = true)]
    pub y: Vec<String>,
    #[arg(long, default_value_t = 0.125)]
    pub grid_step: f64,
    #[command(flatten)]
    pub common: Common,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                commands::EXIT_USAGE
            } else {
                0
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Verify(a) => commands::verify(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Figure(a) => commands::figure(&a),
        Command::Chernoff(a) => commands::chernoff(&a),
        Command::Psi(a) => commands::psi(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("qcoupling: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
