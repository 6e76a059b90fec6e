//! `pdexplain`: partial dependence and explainability from the command line.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 usage error, 3 data or
//! schema error, 4 degenerate (constant) model, 5 external predictor failure.

mod args;
mod commands;
mod settings;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use pdexplain::Error;
use settings::Settings;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::Arg(_) | Error::Engine(_) | Error::Emit(_) => 2,
                Error::Ingest { .. } | Error::Type(_) | Error::Schema(_) | Error::Fit(_) => 3,
                Error::DegenerateModel => 4,
                Error::Predict(_) => 5,
                Error::Persist { .. } | Error::Io(_) => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(Error::DegenerateModel) => {
                write!(f, "DegenerateModelError: {}", Error::DegenerateModel)
            }
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let file = match command.config_path() {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let settings = file.overlay(command.settings());

    if let Some(threads) = settings.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set thread count: {e}")))?;
    }

    let outcome = match &command {
        Command::Simulate(_) => commands::simulate(&settings)?,
        Command::Fit(_) => commands::fit(&settings)?,
        Command::Explain(_) => commands::explain(&settings)?,
        Command::Select(_) => commands::select(&settings)?,
        Command::Pdp(_) => commands::pdp(&settings)?,
    };

    if let Command::Explain(_) | Command::Select(_) | Command::Pdp(_) = command {
        let dir = settings.require_out()?;
        write_manifest(dir, command.name(), &settings, outcome)?;
    }
    Ok(())
}

fn write_manifest(
    dir: &Path,
    command: &str,
    settings: &Settings,
    outcome: commands::Outcome,
) -> Result<(), CliError> {
    let outputs: Vec<String> = outcome
        .outputs
        .iter()
        .filter_map(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "versions": {
            "pdexplain": env!("CARGO_PKG_VERSION"),
            "model_format": pdexplain::predictor::FORMAT_VERSION,
        },
        "command": command,
        "seed": settings.seed(),
        "settings": settings,
        "run": outcome.details,
        "outputs": outputs,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(dir.join("run-manifest.json"), text + "\n")?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pdexplain: {e}");
            ExitCode::from(e.code())
        }
    }
}
