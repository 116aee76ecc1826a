use std::process::ExitCode;

use clap::Parser;
use kinlim::cli::{configure_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(&cli, &mut std::io::stdout().lock()));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("kinlim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
