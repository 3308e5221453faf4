//! `lkss`: split files into leakage-bounded threshold shares, recover them,
//! and check the optimal-size claims.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 not enough shares,
//! 3 a verification check failed.

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

mod commands;

use commands::{Cli, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(lkss::Error::InsufficientShares { .. }) => 2,
            CliError::Verification(_) => 3,
            _ => 1,
        }
    }
}
