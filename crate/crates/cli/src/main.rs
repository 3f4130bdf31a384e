use std::process::ExitCode;

use clap::Parser;
use tmss_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("tmss: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
