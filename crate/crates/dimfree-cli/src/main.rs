//! `dimfree-tails`: seeded experiment runner for the dimfree bound library.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical error, 4 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dimfree::Error;

/// Environment variable overriding the output directory (lower precedence
/// than --out).
const OUT_ENV: &str = "DIMFREE_TAILS_OUT";

#[derive(Parser)]
#[command(
    name = "dimfree-tails",
    version,
    about = "Dimension-free tail bound experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV outputs plus a run report.
    Run {
        /// Path to the experiment config (JSON, one experiment per file).
        config: PathBuf,
        /// Cap the number of worker threads.
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (overrides the config and DIMFREE_TAILS_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and range-check a config without running it.
    Validate {
        /// Path to the experiment config.
        config: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::PartitionMismatch(_) => 2,
        Error::Io(_) => 4,
        _ => 3,
    }
}

#[cfg(feature = "parallel")]
fn cap_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        if let Err(e) = rayon_global_pool(n) {
            eprintln!("warning: could not cap threads: {e}");
        }
    }
}

#[cfg(feature = "parallel")]
fn rayon_global_pool(n: usize) -> Result<(), String> {
    dimfree::runner::build_thread_pool(n).map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
fn cap_threads(_threads: Option<usize>) {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            threads,
            out,
        } => {
            cap_threads(threads);
            let env_out = std::env::var_os(OUT_ENV).map(PathBuf::from);
            let out_dir = out.or(env_out);
            match dimfree::runner::run(&config, out_dir.as_deref()) {
                Ok(report) => {
                    for file in &report.files {
                        println!("{}  {}", file.sha256, file.path.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code_for(&e))
                }
            }
        }
        Command::Validate { config } => {
            match dimfree::runner::load_config(&config)
                .and_then(|cfg| dimfree::runner::validate_config(&cfg))
            {
                Ok(()) => {
                    println!("ok");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code_for(&e))
                }
            }
        }
    }
}
