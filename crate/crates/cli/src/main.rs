//! `ratewarp` command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 data or shape error.

mod args;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] ratewarp_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Core(e) if e.is_io() => 2,
            CliError::Data(_) | CliError::Core(_) => 3,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Wsola(a) => commands::wsola_cmd(a),
        Command::Warp(a) => commands::warp_cmd(a),
        Command::Resample(a) => commands::resample_cmd(a),
        Command::Mel(a) => commands::mel_cmd(a),
        Command::GenInit(a) => commands::gen_init_cmd(a),
        Command::EvalMcd(a) => commands::eval_mcd_cmd(a),
        Command::EvalRtf(a) => commands::eval_rtf_cmd(a),
        Command::EvalRate(a) => commands::eval_rate_cmd(a),
        Command::Matrix(a) => commands::matrix_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
