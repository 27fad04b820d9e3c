use std::process::ExitCode;

use bellwb_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bellwb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
