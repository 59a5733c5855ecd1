use std::process::ExitCode;

use clap::Parser;
use pshenv::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.kind, &cli.args) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.into()
        }
    }
}
