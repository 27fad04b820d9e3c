//! Command-line front end for the `bellwb` workbench.
//!
//! Every subcommand renders one report: a JSON document holding the resolved
//! [`RunConfig`] and the result, or a CSV table. Reports go to `--output`
//! when given and to stdout otherwise.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

mod commands;
mod report;
pub mod state_file;
mod svg;

pub use report::Table;

/// Seed used when neither `--seed` nor `BELLWB_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_050_101;

#[derive(Debug, Parser)]
#[command(
    name = "bellwb",
    version,
    about = "Multisetting Bell inequality workbench"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Seed for frame searches and protocol sampling.
    #[arg(long, global = true, env = "BELLWB_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `(|0..0> + |1..1>)/sqrt 2`.
    Ghz,
    /// `cos(alpha)|0..0> + sin(alpha)|1..1>`.
    GenGhz,
    /// Bound entangled mixture around a phased GHZ state.
    Dur,
    /// Density matrix read from `--state`.
    File,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic and brute-force local-realistic bounds.
    ///
    /// With N = M = 2 the bound is sqrt 2: the inequality is CHSH scaled by
    /// 1/sqrt 2, since the coefficients are cosines of +-pi/4.
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Skip the exhaustive search.
        #[arg(long)]
        analytic_only: bool,
    },
    /// Compares the sum and closed forms of the Bell operator.
    OperatorCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Violation factor of a state family.
    Violation {
        #[arg(long, value_enum)]
        family: Family,
        /// Number of parties; read from the state file when omitted.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: usize,
        /// State parameter (default pi/4 for gen-ghz, 0 for dur).
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        /// Use the Bell operator rotated by the local phase `alpha / N`.
        #[arg(long)]
        twirl: bool,
        /// Maximize over local measurement frames.
        #[arg(long)]
        optimize: bool,
        #[arg(long, default_value_t = bellwb::analysis::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Partial-transpose checks and the PPT Bell bound.
    Ppt {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Quantum/classical success ratios of the communication task.
    Table1 {
        #[arg(long, default_value_t = 5)]
        n_max: usize,
        /// Settings counts; `inf` selects the continuous limit.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,inf")]
        m_list: Vec<String>,
    },
    /// GHZ violation factor against the number of settings.
    Fig1 {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 64)]
        m_max: usize,
        /// Also draw the curves to this SVG file.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Exact and sampled success probabilities of the communication task.
    Ccp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Monte Carlo trials per protocol; 0 reports exact values only.
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = bellwb::ccp::DEFAULT_SHARDS)]
        shards: usize,
    },
}

/// Everything needed to replay a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub n_parties: Option<usize>,
    pub n_settings: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub m_list: Option<Vec<String>>,
    pub n_max: Option<usize>,
    pub m_max: Option<usize>,
    pub family: Option<Family>,
    pub alpha: Option<f64>,
    pub twirl: bool,
    pub optimize: bool,
    pub analytic_only: bool,
    pub restarts: Option<usize>,
    pub state: Option<PathBuf>,
    pub seed: u64,
    pub trials: Option<u64>,
    pub shards: Option<usize>,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl RunConfig {
    fn new(subcommand: &str, cli: &Cli) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            n_parties: None,
            n_settings: None,
            n_list: None,
            m_list: None,
            n_max: None,
            m_max: None,
            family: None,
            alpha: None,
            twirl: false,
            optimize: false,
            analytic_only: false,
            restarts: None,
            state: None,
            seed: cli.seed,
            trials: None,
            shards: None,
            format: cli.format,
            output: cli.output.clone(),
            svg: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bellwb::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("state file {path}: {reason}")]
    StateFile { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing report: {0}")]
    Render(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use bellwb::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::StateFile { .. } => 4,
            CliError::Io { .. } | CliError::Render(_) => 5,
            CliError::Core(e) => match e {
                E::BudgetExceeded(_) => 3,
                E::InvalidState(_) | E::NotHermitian(_) => 4,
                E::NoConvergence(_) => 1,
                _ => 2,
            },
        }
    }
}

/// A rendered report.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub config: RunConfig,
    pub result: serde_json::Value,
    pub table: Table,
}

impl Report {
    pub fn render(&self) -> Result<String, CliError> {
        match self.config.format {
            Format::Json => {
                let doc = serde_json::json!({ "config": self.config, "result": self.result });
                let mut text = serde_json::to_string_pretty(&doc)
                    .map_err(|e| CliError::Render(e.to_string()))?;
                text.push('\n');
                Ok(text)
            }
            Format::Csv => self.table.to_csv(),
        }
    }
}

/// Runs a parsed command and returns its report without writing it.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    commands::dispatch(cli)
}

/// Runs a parsed command and writes the report.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let report = execute(cli)?;
    let text = report.render()?;
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}
