use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use persym_cli::{run, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    env_logger::init();
    let config = Cli::parse().into_config();
    match run(&config) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(report.output.as_bytes()).and_then(|()| out.flush()).is_err() {
                return ExitCode::from(EXIT_ERROR as u8);
            }
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("persym: error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
