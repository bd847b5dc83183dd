use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

use cweth_cli::{execute, Cli, CliError};

fn print(v: &Value, pretty: bool) {
    let s = if pretty {
        serde_json::to_string_pretty(v)
    } else {
        serde_json::to_string(v)
    };
    println!("{}", s.expect("JSON values always serialize"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or_default().trim_start_matches("error: ");
            print(&CliError::Usage(first.to_string()).to_json(), false);
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(lines) => {
            for l in &lines {
                print(l, cli.pretty);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            print(&e.to_json(), cli.pretty);
            ExitCode::FAILURE
        }
    }
}
