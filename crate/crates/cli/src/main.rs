mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "qcorr",
    version,
    about = "Multi-qubit correlation analysis and work-extraction tools"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; figures default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FigureKind {
    /// Distillation probability versus fidelity.
    Fig2,
    /// Covariance versus fidelity.
    Fig3,
}

#[derive(Args, Debug, Clone)]
pub struct StateArgs {
    /// JSON state file, or named states such as `w_mixture:n=3,f=0.5` joined by `*`.
    #[arg(long)]
    pub state: Option<String>,
    /// Party count for a named state given without `n=`.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Product verdicts per cut, genuine correlations, degree and factorization.
    Analyze {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = qcorr::cuts::PRODUCT_TOL)]
        tol: f64,
    },
    /// Figure data as (n, F, value) rows.
    Figure {
        which: FigureKind,
        /// Party counts (comma separated).
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Fidelity grid (comma separated).
        #[arg(long, value_delimiter = ',')]
        fidelity: Vec<f64>,
        /// Number of grid points when no explicit grid is given.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Runs a postulate scenario or monotonicity check from a JSON description.
    Postulates {
        /// Scenario file, or the JSON text itself.
        scenario: String,
        /// covariance, cov_z, degree or genuine; overrides the scenario's own choice.
        #[arg(long)]
        indicator: Option<String>,
        #[arg(long, default_value_t = qcorr::cuts::PRODUCT_TOL)]
        tol: f64,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Local W filter: simulated on a state, or closed forms from --n with --epsilon or --fidelity.
    Distill {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        fidelity: Option<f64>,
    },
    /// Pauli-string covariance scan, or a single string with --paulis.
    Covariance {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        paulis: Option<String>,
        /// Sample this many random strings instead of the full scan.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Work extraction: family optimum, or a protocol given as JSON.
    Work {
        #[command(flatten)]
        state: StateArgs,
        /// Protocol file, or the JSON text itself.
        #[arg(long)]
        protocol: Option<String>,
        /// Restrict the measure-and-broadcast family to this measuring party.
        #[arg(long)]
        measuring: Option<usize>,
    },
    /// Unrestricted optimum minus the best cut-respecting optimum.
    DeltaW {
        #[command(flatten)]
        state: StateArgs,
    },
}

/// Exit codes.
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DOMAIN: u8 = 2;
pub const EXIT_SIZE: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli, args[1..].to_vec()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
