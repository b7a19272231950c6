use std::process::ExitCode;

use clap::Parser;
use dsm_core::cli::{execute, Cli};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match execute(cli.command, &args) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("crackdsm: {e}");
            ExitCode::FAILURE
        }
    }
}
