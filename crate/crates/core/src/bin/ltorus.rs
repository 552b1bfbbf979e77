use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use liouville_torus::cli::{run, Command, Invocation};

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Counts,
    Solve,
    Sweep,
    Bubble,
    Verify,
}

/// Mean field equation on a flat torus: solver runs and multiplicity counts.
#[derive(Parser)]
#[command(name = "ltorus", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// grid points per direction, overriding the config
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Cmd::Counts => Command::Counts,
        Cmd::Solve => Command::Solve,
        Cmd::Sweep => Command::Sweep,
        Cmd::Bubble => Command::Bubble,
        Cmd::Verify => Command::Verify,
    };
    let inv = Invocation {
        command,
        config: args.config,
        out: args.out,
        resolution: args.resolution,
        seed: args.seed,
    };
    match run(&inv) {
        Ok(_) => {
            println!("{}: ok, report in {}", command.name(), inv.out.join("report.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ltorus {}: {e}", command.name());
            ExitCode::FAILURE
        }
    }
}
