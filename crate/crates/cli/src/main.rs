use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let args = udw_cli::Args::parse();
    ExitCode::from(udw_cli::run(&args))
}
