//! Run a CLI command from a config file through the library entry point.
//!
//! `cargo run --example run_config -- counts examples/configs/counts_cos.toml`

use std::path::PathBuf;

use liouville_torus::cli::{run, Command, Invocation};

fn main() -> liouville_torus::Result<()> {
    let mut args = std::env::args().skip(1);
    let command = match args.next().as_deref() {
        Some("solve") => Command::Solve,
        Some("sweep") => Command::Sweep,
        Some("bubble") => Command::Bubble,
        Some("verify") => Command::Verify,
        _ => Command::Counts,
    };
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let config = args.next().map(PathBuf::from).unwrap_or(dir.join("counts_cos.toml"));
    let out = std::env::temp_dir().join(format!("ltorus-{}", command.name()));
    let report = run(&Invocation { command, config, out: out.clone(), resolution: None, seed: None })?;
    println!("{}", serde_json::to_string_pretty(&report.results).unwrap_or_default());
    println!("artifacts in {}", out.display());
    Ok(())
}
