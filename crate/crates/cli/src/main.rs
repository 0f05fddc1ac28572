//! `hql`: command-line front end for the σ₂/σ₁ laboratory.
//!
//! ```text
//! hql verify|solve|liouville|interior [--config <path>] --out <dir> [--seed <u64>]
//! ```
//!
//! Exit codes: 0 success, 1 failed check or I/O error, 2 usage or config
//! error, 3 domain or precondition error, 4 solver failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Options;
use error::{CliError, EXIT_OK, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "hql", version, about = "Numerical laboratory for the σ₂/σ₁ Hessian quotient equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the symmetric-function and matrix property suites.
    Verify(Common),
    /// Solve one Dirichlet problem.
    Solve(Common),
    /// Check that solutions with quadratic data are quadratic.
    Liouville(Common),
    /// Run the interior-estimate refinement study.
    Interior(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config with "schema": 1; the built-in default when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("HQL_THREADS") else {
        return Ok(());
    };
    let threads: usize = match raw.trim().parse() {
        Ok(t) if t > 0 => t,
        _ => return Err(CliError::Usage(format!("HQL_THREADS must be a positive integer, got {raw:?}"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {threads} threads: {e}")))
}

fn run(cli: Cli) -> Result<String, CliError> {
    configure_threads()?;
    type Handler = fn(&Options) -> Result<String, CliError>;
    let (run, common): (Handler, Common) = match cli.command {
        Command::Verify(c) => (commands::verify, c),
        Command::Solve(c) => (commands::solve, c),
        Command::Liouville(c) => (commands::liouville, c),
        Command::Interior(c) => (commands::interior, c),
    };
    run(&Options { config: common.config.as_deref(), out: &common.out, seed: common.seed })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::from(EXIT_OK)
        }
        Err(e) => {
            eprintln!("hql: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
