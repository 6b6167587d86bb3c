use clap::error::ErrorKind;
use clap::Parser;
use std::process::exit;

use smog::cli::{run, Cli};

/// Exit codes: 0 success, 1 usage error, 2 data or validation error.
fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        exit(2);
    }
}
