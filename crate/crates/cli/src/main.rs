use std::process::ExitCode;

use clap::Parser;
use topophase_cli::{run_cli, Cli};

fn main() -> ExitCode {
    run_cli(&Cli::parse())
}
