//! The `ggc` command line.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 I/O error,
//! 3 verification failure.

mod args;
mod commands;
mod csvio;

use std::process::ExitCode;

use clap::Parser;

pub use args::{parse_bytes, parse_limit, parse_pairs, Cli, Command, PAIR_BOUND_CAP};
pub use commands::Outcome;
pub use csvio::{read_sweep, SweepRow};

use crate::error::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_INPUT,
    }
}

pub fn run(cli: &Cli) -> crate::Result<Outcome> {
    match &cli.command {
        Command::Sweep(a) => commands::sweep(a),
        Command::Rank(a) => commands::rank(a),
        Command::Predict(a) => commands::predict(a),
        Command::VerifyProp(a) => commands::verify_prop(a),
        Command::Report(a) => commands::report(a),
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::from(EXIT_OK),
        Ok(Outcome::VerificationFailed) => ExitCode::from(EXIT_VERIFY),
        Err(e) => {
            eprintln!("ggc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
