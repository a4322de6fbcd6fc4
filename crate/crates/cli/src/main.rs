mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use maxwell_core::density_evolution::{DEFAULT_GRID, DEFAULT_MAX_ITER, DEFAULT_TOL};
use maxwell_core::Error;

#[derive(Parser, Debug)]
#[command(name = "maxwell", about = "Threshold, EXIT and Maxwell-decoder analysis of LDPC ensembles on the BEC")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON ensemble description
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
    /// CSV output path; a JSON sidecar is written next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Bp,
    Ebp,
    Map,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Sequential,
    Rounds,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// BP, stability, Shannon and MAP thresholds
    Thresholds(#[command(flatten)] Common),
    /// BP, EBP or MAP EXIT curve
    Curve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Kind,
    },
    /// Intervals of x on which the BP curve follows the EBP curve
    Partition(#[command(flatten)] Common),
    /// Asymptotic Maxwell-decoder entropy against determined fraction
    Trajectory {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: f64,
    },
    /// Ψ(u) scan of the residual ensemble with the tightness verdict
    Psi {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: f64,
    },
    /// Asymptotic conditional entropy over a range of ε
    EntropySweep {
        #[command(flatten)]
        common: Common,
        /// number of ε values in (0, 1]
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Finite-length Maxwell decoding over many graph and channel draws
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = StrategyArg::Sequential)]
        strategy: StrategyArg,
        /// guess-fraction step for the rounds strategy
        #[arg(long, default_value_t = 0.01)]
        delta_gamma: f64,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// directory for one event log per trial
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
    /// Exact EXIT polynomial of a small code
    ExactExit {
        #[command(flatten)]
        common: Common,
        /// adjacency-list graph file
        #[arg(long, conflicts_with = "code")]
        graph: Option<PathBuf>,
        /// spc:N, rep:N or hamming:P
        #[arg(long)]
        code: Option<String>,
    },
    /// Thresholds of an ensemble with a component-code check side
    Gldpc {
        #[command(flatten)]
        common: Common,
        /// use the Hamming code of length 2^P − 1 as component
        #[arg(long)]
        hamming: Option<usize>,
    },
}

fn long_version() -> &'static str {
    let s = format!(
        "{} (tol {DEFAULT_TOL:e}, grid {DEFAULT_GRID}, max_iter {DEFAULT_MAX_ITER}, csv digits 12)",
        env!("CARGO_PKG_VERSION")
    );
    Box::leak(s.into_boxed_str())
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NonConvergence { .. } | Error::GridTooCoarse { .. } | Error::BalanceNotBracketed { .. } => 3,
        Error::OracleBound(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let version = long_version();
    let matches = Cli::command().version(version).long_version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        // the reader went away, as with `| head`
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
