use std::process::ExitCode;

use clap::Parser;
use tracelab_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            println!("{}", report.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("tracelab {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
