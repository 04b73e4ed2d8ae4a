//! Command-line experiment runner.
//!
//! `oseen-lab <subcommand>`; see `docs/cli.md` for the full interface.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use config::{parse_config, ConfigError, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "oseen-lab", version, about = "Perturbed Oseen vortex experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Experiment configuration (TOML). Omitted means all defaults.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the study selected by `study.kind`.
    Run {
        #[command(flatten)]
        common: Common,
        /// Worker threads for decay studies.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Quadrature checks of the profile and remainder bounds.
    VerifyLemmas {
        #[command(flatten)]
        common: Common,
    },
    /// Decay runs for every `study.alphas` entry.
    DecayStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Fit decay rates to trajectory CSVs.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Integrability exponent, sets `mu = 1/q - 1/2`.
        #[arg(long, default_value_t = 4.0 / 3.0)]
        q: f64,
        #[arg(long, default_value_t = 10.0)]
        t_min: f64,
        #[arg(long, default_value_t = f64::INFINITY)]
        t_max: f64,
        /// Write here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn load(common: &Common, jobs: usize) -> Result<commands::Context, CliError> {
    let (cfg, base) = match &common.config {
        Some(path) => (
            parse_config(path)?,
            path.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (ExperimentConfig::default(), PathBuf::new()),
    };
    if jobs == 0 {
        return Err(CliError::Validation("--jobs must be at least 1".into()));
    }
    let out = common
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    Ok(commands::Context { cfg, base, out, jobs })
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { common, jobs } => commands::study(&load(&common, jobs)?),
        Command::VerifyLemmas { common } => commands::verify_lemmas(&load(&common, 1)?),
        Command::DecayStudy { common, jobs } => commands::decay_study(&load(&common, jobs)?),
        Command::Report {
            inputs,
            q,
            t_min,
            t_max,
            output,
        } => {
            if !(t_min < t_max) {
                return Err(CliError::Validation(format!(
                    "empty fit window [{t_min}, {t_max}]"
                )));
            }
            let text = commands::report(&inputs, q, (t_min, t_max))?;
            match output {
                Some(path) => std::fs::write(&path, text).map_err(|e| {
                    CliError::Runtime(format!("cannot write {}: {e}", path.display()))
                }),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
