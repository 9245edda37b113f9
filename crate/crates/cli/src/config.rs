use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use skewbm::{SkewParams, TruncationPolicy};

#[derive(Debug, Parser)]
#[command(
    name = "skewbm",
    version,
    about = "Skew Brownian motion with two semipermeable barriers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Evaluate p(t, x, y) on a grid of y values.
    Density(RunArgs),
    /// Draw exact samples of X_t given X_0 = x.
    Sample(RunArgs),
    /// Simulate one path on a uniform time grid.
    Path(RunArgs),
    /// Run a validation suite and report pass/fail per check.
    Validate(RunArgs),
    /// Re-run a serialized configuration, or the `config` block of an earlier JSON output.
    Replay {
        file: PathBuf,
        /// Write to this path instead of the one recorded in the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub z1: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub z2: f64,
    /// Time horizon of the transition.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Starting point of the transition.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub x: f64,
    /// Starting point of a path.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Number of samples (sample, ks suite) or walkers (walk suite).
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of independent streams the samples are split across.
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[arg(long, default_value_t = 10)]
    pub nmax: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub ymin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub ymax: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub ysteps: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Density,
    Sample,
    Path,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Normalization,
    Transmission,
    Chapman,
    Balance,
    Ks,
    Reduction,
    OracleEquivalence,
    Walk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Everything a run depends on; serialized into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: SkewParams,
    pub policy: TruncationPolicy,
    pub t: f64,
    pub x: f64,
    pub x0: f64,
    pub n: usize,
    pub shards: usize,
    pub seed: u64,
    pub stream: u64,
    pub ymin: f64,
    pub ymax: f64,
    pub ysteps: usize,
    pub dt: f64,
    pub horizon: f64,
    pub suite: Option<Suite>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SAMPLES: usize = 50_000;
pub const DEFAULT_WALKERS: usize = 100_000;

impl RunConfig {
    pub fn from_args(command: Command, a: RunArgs) -> Result<Self, crate::CliError> {
        let params = SkewParams::new(a.z1, a.z2, a.beta1, a.beta2, a.mu)?;
        let policy = TruncationPolicy::new(a.nmax, a.tol)?;
        if command == Command::Validate && a.suite.is_none() {
            return Err(crate::CliError::Usage("validate needs --suite".into()));
        }
        if a.shards == 0 {
            return Err(crate::CliError::Usage("--shards must be at least 1".into()));
        }
        if a.ysteps < 2 {
            return Err(crate::CliError::Usage("--ysteps must be at least 2".into()));
        }
        let spread = 4.0 * a.t.max(0.0).sqrt() + a.mu.abs() * a.t.max(0.0);
        let n_default = match a.suite {
            Some(Suite::Walk) => DEFAULT_WALKERS,
            _ => DEFAULT_SAMPLES,
        };
        Ok(Self {
            command,
            params,
            policy,
            t: a.t,
            x: a.x,
            x0: a.x0.unwrap_or(a.x),
            n: a.n.unwrap_or(n_default),
            shards: a.shards,
            seed: a.seed,
            stream: a.stream,
            ymin: a.ymin.unwrap_or(a.x.min(a.z1) - spread),
            ymax: a.ymax.unwrap_or(a.x.max(a.z2) + spread),
            ysteps: a.ysteps,
            dt: a.dt,
            horizon: a.horizon,
            suite: a.suite,
            format: a.format,
            out: a.out,
        })
    }
}
