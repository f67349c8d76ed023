//! `sfos`: L∞ analysis and state-feedback synthesis for singular
//! fractional-order systems described in TOML files.

mod args;
mod commands;
mod sysfile;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
