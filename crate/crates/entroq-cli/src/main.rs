//! `entroq`: quadrature rules, divergence oracles, variational estimation
//! (local and distributed), the barren-plateau scan and the channel
//! superadditivity scan.
//!
//! Every run writes a `manifest.json` with the fully resolved
//! configuration next to its outputs, and reruns from the same manifest
//! produce byte-identical files. The environment variable `ENTROQ_SEED`
//! overrides the seed of any command.

use std::process::ExitCode;

use clap::Parser;

mod commands;
mod manifest;

use entroq_core::error::Error;

#[derive(Parser)]
#[command(
    name = "entroq",
    version,
    about = "variational quantum relative entropy toolkit"
)]
struct Cli {
    /// Worker threads for node- and grid-level parallelism (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: commands::Command,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::SupportViolation { .. } => 3,
        Error::Estimation(_) | Error::NonFiniteLoss { .. } | Error::Transport(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
