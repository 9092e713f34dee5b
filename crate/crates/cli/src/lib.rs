//! Command-line front end: multiplication, verification, tables, analysis
//! and traces.
//!
//! Every command returns its stdout text; errors are single lines with a
//! code prefix such as `E_PARAM:`.

pub mod args;
pub mod commands;
pub mod error;
pub mod hexio;
pub mod trace;
pub mod verify;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::{CliError, ErrorCode};

/// What a run printed and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn err(e: &CliError) -> Self {
        Self {
            code: e.code.exit_code(),
            stdout: String::new(),
            stderr: format!("{e}\n"),
        }
    }
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Output::ok(e.to_string());
        }
        Err(e) => {
            let text = e.to_string();
            let message: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let message = message.join(" ");
            let message = message.strip_prefix("error: ").unwrap_or(&message);
            return Output::err(&CliError::new(ErrorCode::Usage, message));
        }
    };
    dispatch(&cli)
}

fn dispatch(cli: &Cli) -> Output {
    let result = match &cli.command {
        Command::Mul(a) => commands::cmd_mul(a, cli.json),
        Command::Tables(a) => commands::cmd_tables(a, cli.json),
        Command::Analyze(a) => commands::cmd_analyze(a, cli.json),
        Command::Trace(a) => trace::cmd_trace(a),
        Command::Verify(a) => {
            let run = verify::VerifyOptions::from_args(a, cli.seed)
                .and_then(|opts| verify::cmd_verify(&opts, cli.json));
            return match run {
                Ok((text, true)) => Output::ok(text),
                Ok((text, false)) => Output {
                    code: ErrorCode::Verify.exit_code(),
                    stdout: text,
                    stderr: format!(
                        "{}\n",
                        CliError::new(ErrorCode::Verify, "one or more cases failed")
                    ),
                },
                Err(e) => Output::err(&e),
            };
        }
    };
    match result {
        Ok(text) => Output::ok(text),
        Err(e) => Output::err(&e),
    }
}
