mod args;
mod commands;
mod validate;

use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::{Cli, Command, LawsAction};

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Input(String),
    /// Exit 3.
    Solver(String),
    /// Exit 4.
    Validation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "invalid-input",
            CliError::Solver(_) => "solver-failure",
            CliError::Validation(_) => "validation-failure",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Solver(m) | CliError::Validation(m) => m,
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: u8,
    kind: &'a str,
    message: &'a str,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

fn emit_error(e: &CliError) -> ExitCode {
    let body = ErrorReport {
        error: ErrorBody {
            code: e.code(),
            kind: e.kind(),
            message: e.message(),
        },
    };
    eprintln!(
        "{}",
        serde_json::to_string(&body).expect("error report serializes")
    );
    ExitCode::from(e.code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return emit_error(&CliError::Input(e.to_string())),
    };
    let result = match cli.command {
        Command::GroundState(a) => commands::ground_state(&a),
        Command::MassCurve(a) => commands::mass_curve(&a),
        Command::Normalized(a) => commands::normalized(&a),
        Command::Validate(a) => validate::run(&a),
        Command::Laws {
            action: LawsAction::Export { out },
        } => commands::export_laws(&out),
    };
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => emit_error(&e),
    }
}
