use std::process::ExitCode;

use clap::Parser;
use padfair_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match padfair_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if cli.error_json {
                eprintln!(
                    "{}",
                    serde_json::to_string(&e.report()).expect("error report serializes")
                );
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
