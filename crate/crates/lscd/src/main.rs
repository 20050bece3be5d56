use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = lscd::cli::Cli::parse();
    match lscd::cli::run(cli, &mut std::io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
