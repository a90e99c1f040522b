use std::process::ExitCode;

use clap::Parser;
use spraykit_cli::{execute, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("spraykit: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
