use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use minplus_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    match run(&cli, &argv) {
        Ok(report) => {
            // a closed pipe on stdout is not an error of the run
            let _ = writeln!(std::io::stdout(), "{}", report.to_json());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
