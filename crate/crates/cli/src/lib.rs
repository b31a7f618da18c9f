//! The `xyent` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 numerical
//! convergence failure, 3 verification failure.

pub mod args;
pub mod commands;
pub mod output;
pub mod report;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

/// A run that ends with a nonzero exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Usage(String),
    Convergence(String),
    Verification(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Convergence(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Convergence(m) | Failure::Verification(m) => m,
        }
    }

    /// Parameter errors outrank convergence failures.
    pub fn worse(current: Option<Failure>, next: Failure) -> Failure {
        match current {
            Some(c) if c.code() == 1 || next.code() != 1 => c,
            _ => next,
        }
    }
}

impl From<xyent::Error> for Failure {
    fn from(e: xyent::Error) -> Self {
        if e.is_convergence() {
            Failure::Convergence(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

/// Parses `argv` and runs the selected subcommand.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("xyent: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn dispatch(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Entropy(a) => match commands::entropy(a) {
            Ok(json) => {
                commands::write_stdout(&(json + "\n"));
                Ok(())
            }
            Err((json, f)) => {
                if let Some(json) = json {
                    commands::write_stdout(&(json + "\n"));
                }
                Err(f)
            }
        },
        Command::Scan(a) => {
            let note = commands::scan(a)?;
            eprint!("{note}");
            Ok(())
        }
        Command::Spectrum(a) => {
            commands::write_stdout(&commands::spectrum(a)?);
            Ok(())
        }
        Command::Verify(a) => {
            let checks = commands::verify(a)?;
            let mut text = String::new();
            for c in &checks {
                text.push_str(&c.line());
                text.push('\n');
            }
            commands::write_stdout(&text);
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Verification(format!("failed checks: {}", failed.join(", "))))
            }
        }
        Command::CriticalFit(a) => {
            let report = commands::critical_fit_report(a)?;
            commands::write_stdout(&(output::to_json(&report) + "\n"));
            Ok(())
        }
    }
}
