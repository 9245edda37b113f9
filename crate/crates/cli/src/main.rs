mod commands;
mod config;
mod suites;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use config::{Cli, CliCommand, Command, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] skewbm::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Model(_) => "domain",
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Json(_) => 2,
            CliError::Model(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

const EXIT_VALIDATION_FAILED: u8 = 4;

fn replay_config(file: &PathBuf, out: Option<PathBuf>) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(file)?;
    let text = text
        .strip_prefix("# config: ")
        .map_or(text.as_str(), |rest| rest.lines().next().unwrap_or(""));
    let value: Value = serde_json::from_str(text)?;
    let inner = value.get("config").cloned().unwrap_or(value);
    let mut cfg: RunConfig = serde_json::from_value(inner)?;
    if out.is_some() {
        cfg.out = out;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let cfg = match cli.command {
        CliCommand::Density(a) => RunConfig::from_args(Command::Density, a)?,
        CliCommand::Sample(a) => RunConfig::from_args(Command::Sample, a)?,
        CliCommand::Path(a) => RunConfig::from_args(Command::Path, a)?,
        CliCommand::Validate(a) => RunConfig::from_args(Command::Validate, a)?,
        CliCommand::Replay { file, out } => replay_config(&file, out)?,
    };
    let output = commands::run(cfg)?;
    let text = output.render()?;
    match &output.config.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(output.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VALIDATION_FAILED),
        Err(e) => {
            let body = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{body}");
            ExitCode::from(e.exit_code())
        }
    }
}
