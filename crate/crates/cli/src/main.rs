use std::process::ExitCode;

use mzi_cli::{parse_config, run, CliError};

fn report(err: &CliError) -> ExitCode {
    match err {
        CliError::Clap(e) => {
            let _ = e.print();
        }
        other => eprintln!("error[{}]: {other}", other.category()),
    }
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let config = match parse_config(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => return report(&e),
    };
    match run(&config) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => report(&e),
    }
}
