//! `skqd`: background-field scans, SKQD runs, transition fits and the
//! per-size summary table.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use skqd::Error;

mod commands;
mod config;

use config::Overrides;

#[derive(Parser)]
#[command(name = "skqd", version, about = "Sample-based Krylov diagonalization of the lattice Schwinger model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact ground state over the l0 grid
    Exact {
        #[command(flatten)]
        opts: Overrides,
    },
    /// SKQD over the l0 grid from simulated or recorded shots
    Skqd {
        #[command(flatten)]
        opts: Overrides,
        /// Counts file for the next Trotter step; repeat in step order
        #[arg(long = "counts-file", value_name = "FILE")]
        counts_files: Vec<PathBuf>,
        /// Skip the exact reference energies
        #[arg(long)]
        no_exact: bool,
    },
    /// Transition point per size and the finite-size fit
    ScanFit {
        #[command(flatten)]
        opts: Overrides,
    },
    /// Mean deviation and dimension ratio per size
    Table1 {
        #[command(flatten)]
        opts: Overrides,
    },
    /// Validate counts files and show post-selection survivors
    IngestCheck {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        p_min: f64,
        /// Expected number of sites
        #[arg(long)]
        n_sites: Option<usize>,
    },
}

/// 2 config, 3 infeasible, 4 solver or analysis, 5 parse, 1 anything else.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParams(_) => 2,
        Error::Infeasible { .. } => 3,
        Error::NoConvergence { .. } | Error::EmptySubspace(_) | Error::Detection(_) | Error::Fit(_) => 4,
        Error::Parse { .. } | Error::Schema { .. } => 5,
        _ => 1,
    }
}

fn run(cli: Cli) -> skqd::Result<()> {
    match cli.command {
        Command::Exact { opts } => commands::cmd_exact(opts.resolve()?),
        Command::Skqd {
            opts,
            counts_files,
            no_exact,
        } => commands::cmd_skqd(opts.resolve()?, &counts_files, !no_exact),
        Command::ScanFit { opts } => commands::cmd_scan_fit(opts.resolve()?),
        Command::Table1 { opts } => commands::cmd_table1(opts.resolve()?),
        Command::IngestCheck { files, p_min, n_sites } => commands::cmd_ingest_check(&files, p_min, n_sites),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
