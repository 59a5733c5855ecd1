//! Command-line front end for `pshenv-core`: scenario configs in, CSV and JSON out.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod verify;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use commands::Outcome;
pub use config::Config;
pub use error::CliError;
pub use report::{Format, RunReport};

#[derive(Debug, Parser)]
#[command(name = "pshenv", version, about = "Two-sided numerical envelopes of ω-psh functions")]
pub struct Cli {
    #[command(subcommand)]
    pub kind: CommandKind,
    #[command(flatten)]
    pub args: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandKind {
    /// Disc-side infimum at each point, with the grid sup side when `oracle_grid` is set.
    Envelope,
    /// Relative extremal function of the `extremal.set` from both sides.
    Extremal,
    /// Hull membership decisions for the `hull.compact` set.
    Hull,
    /// Named verification suites; exits 1 when any fails.
    Verify,
    /// The grid field alone, written node by node.
    Oracle,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Scenario config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "PSHENV_OUT_DIR", default_value = "pshenv-out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

/// Runs one command on an already resolved config.
pub fn execute(kind: CommandKind, config: &Config) -> Result<Outcome, CliError> {
    match kind {
        CommandKind::Envelope => commands::run_envelope(config),
        CommandKind::Extremal => commands::run_extremal(config),
        CommandKind::Hull => commands::run_hull(config),
        CommandKind::Verify => verify::run_verify(config),
        CommandKind::Oracle => commands::run_oracle(config),
    }
}

/// Full CLI flow: load, resolve, run on a sized thread pool, write outputs.
pub fn run(kind: CommandKind, args: &RunArgs) -> Result<RunReport, CliError> {
    let path = args.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let config = Config::load(path)?.resolve(args.seed)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| execute(kind, &config))?;
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    report::write_outputs(&args.out, args.format, &outcome.report, &outcome.tables)?;
    match outcome.report.failed_suites() {
        0 => Ok(outcome.report),
        n => Err(CliError::SuiteFailure(n)),
    }
}
