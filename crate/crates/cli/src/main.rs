use std::process::ExitCode;

use clap::Parser;
use trapped_cli::{error_json, execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.exit as u8)
        }
        Err(e) => {
            eprint!("{}", error_json(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
