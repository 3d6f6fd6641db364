use std::process::ExitCode;

use clap::Parser;
use frechet_skew_cli::{configure_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
