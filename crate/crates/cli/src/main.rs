//! `tphase`: config-driven runs of the ternary phase-field models.
//!
//! Exit codes: 0 success, 1 config error, 2 blow-up, 3 no equilibrium when
//! one was required, 4 failed check, 5 i/o error.

mod check;
mod commands;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::Options;

#[derive(Parser, Debug)]
#[command(name = "tphase", version, about = "Ternary Cahn-Hilliard phase-field simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output root; the TPHASE_OUT environment variable takes precedence.
    #[arg(long, global = true, default_value = "tphase-out")]
    out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Snapshot interval in steps, taken on diagnostics rows; 0 keeps only
    /// the final state.
    #[arg(long, global = true, default_value_t = 0)]
    snapshot_every: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single simulation.
    Run { config: PathBuf },
    /// Nucleation study over the declared ratios and interface widths.
    CuspSweep { config: PathBuf },
    /// Side-by-side run of two models from a common state.
    Compare { config: PathBuf },
    /// Analytic identities and discretisation self-tests.
    Check { config: PathBuf },
}

fn main() {
    let cli = Cli::parse();
    let out = match std::env::var_os("TPHASE_OUT") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => cli.out,
    };
    let opts = Options {
        out,
        jobs: cli.jobs,
        snapshot_every: cli.snapshot_every,
    };
    let result = match &cli.command {
        Command::Run { config } => commands::run(config, &opts),
        Command::CuspSweep { config } => commands::cusp_sweep(config, &opts),
        Command::Compare { config } => commands::compare(config, &opts),
        Command::Check { config } => check::check(config, &opts),
    };
    if let Err(e) = result {
        eprintln!("tphase: {e}");
        std::process::exit(e.exit_code());
    }
}
