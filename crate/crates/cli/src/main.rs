//! `lpp-lab`: run experiments and invariant checks from the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters.
    Usage(String),
    /// A check ran and did not hold.
    CheckFailed(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<lpp_core::LppError> for CliError {
    fn from(e: lpp_core::LppError) -> Self {
        use lpp_core::LppError::*;
        match e {
            Parameter(_) | Domain(_) | OutOfWindow { .. } | CellBudget { .. } | TooLarge { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.into()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lpp-lab", version, about = "Exponential last passage percolation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Base seed [default: $LPP_LAB_SEED, else 0]
    #[arg(long)]
    seed: Option<String>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads: a positive integer or "auto"
    #[arg(long)]
    threads: Option<String>,
    /// key=value settings file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the shape function, its corrections and Taylor remainders
    Shape {
        #[arg(long)]
        rho: Option<String>,
        #[arg(long)]
        n: Option<String>,
        /// Signed axis coordinate for g, h and the axis remainder
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        /// Antidiagonal offset for the flat-profile remainder
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Point-to-point passage time from the origin in i.i.d. weights
    P2p {
        #[arg(long)]
        rho: Option<String>,
        #[arg(long)]
        n: Option<String>,
        /// Target X,Y [default: the characteristic point]
        #[arg(long)]
        to: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Tail of the exit time |Z| on the N^(2/3) scale
    ExitTail(TailArgs),
    /// Upper tail of the stationary passage time on the N^(1/3) scale
    UpperTail(TailArgs),
    /// Lower tail of the stationary passage time on the N^(1/3) scale
    LowerTail(TailArgs),
    /// Variance of the stationary passage time across N
    Variance {
        #[arg(long)]
        rho: Option<String>,
        /// Comma-separated list, e.g. 256,1024
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        replicates: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Check the coupled three-way passage identity and Z = q_N
    CouplingCheck(CheckArgs),
    /// KS test of derived boundary increments against their marginals
    BurkeCheck(CheckArgs),
    /// Compare dynamic programming with brute-force enumeration
    OracleCheck {
        /// Number of random instances
        #[arg(long)]
        replicates: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-fit the tail exponent of an existing CSV
    Fit {
        input: PathBuf,
        /// Threshold interval a:b
        #[arg(long)]
        window: Option<String>,
        /// Comma-separated exponents for model comparison
        #[arg(long)]
        candidates: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
pub struct TailArgs {
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    /// Grid a:b:step in units of the natural scale
    #[arg(long)]
    thresholds: Option<String>,
    /// Fit window a:b
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    candidates: Option<String>,
    /// Bootstrap resamples for the kappa interval (0 disables)
    #[arg(long)]
    bootstrap: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    rho: Option<String>,
    /// Side of the coupled window
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    #[command(flatten)]
    common: Common,
}

fn run(cli: Cli) -> Result<(), CliError> {
    use commands::*;
    use lpp_core::montecarlo::ExperimentKind;
    match cli.command {
        Command::Shape { rho, n, x, t, common } => shape(common, vec![("rho", rho), ("n", n), ("x", x), ("t", t)]),
        Command::P2p { rho, n, to, common } => p2p(common, vec![("rho", rho), ("n", n), ("to", to)]),
        Command::ExitTail(a) => tail(ExperimentKind::ExitTail, a),
        Command::UpperTail(a) => tail(ExperimentKind::UpperTail, a),
        Command::LowerTail(a) => tail(ExperimentKind::LowerTail, a),
        Command::Variance { rho, n, replicates, common } => {
            variance(common, vec![("rho", rho), ("n", n), ("replicates", replicates)])
        }
        Command::CouplingCheck(a) => coupling_check(a),
        Command::BurkeCheck(a) => burke_check(a),
        Command::OracleCheck { replicates, common } => oracle_check(common, vec![("replicates", replicates)]),
        Command::Fit { input, window, candidates, common } => {
            fit(input, common, vec![("window", window), ("candidates", candidates)])
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::CheckFailed(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
