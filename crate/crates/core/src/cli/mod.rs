//! Batch front-end: `ipmdro <subcommand> --config <path> --out <dir> [--seed N] [--tol X]`.
//!
//! Each run reads a JSON problem file, evaluates one experiment and writes
//! `<subcommand>.csv` and `<subcommand>.json` into the output directory.

pub mod commands;
pub mod config;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use thiserror::Error;

use crate::error::Error;
use crate::tolerances::Tolerances;

pub use config::ProblemConfig;
pub use report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Subcommand {
    Ipm,
    Penalty,
    DroSup,
    VerifyIdentity,
    Tightness,
    CriticCheck,
    GanBound,
    ReproSin,
    SweepEps,
}

impl Subcommand {
    pub const ALL: [Subcommand; 9] = [
        Subcommand::Ipm,
        Subcommand::Penalty,
        Subcommand::DroSup,
        Subcommand::VerifyIdentity,
        Subcommand::Tightness,
        Subcommand::CriticCheck,
        Subcommand::GanBound,
        Subcommand::ReproSin,
        Subcommand::SweepEps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Ipm => "ipm",
            Subcommand::Penalty => "penalty",
            Subcommand::DroSup => "dro-sup",
            Subcommand::VerifyIdentity => "verify-identity",
            Subcommand::Tightness => "tightness",
            Subcommand::CriticCheck => "critic-check",
            Subcommand::GanBound => "gan-bound",
            Subcommand::ReproSin => "repro-sin",
            Subcommand::SweepEps => "sweep-eps",
        }
    }

    /// Only `repro-sin` runs without a config file.
    pub fn needs_config(self) -> bool {
        self != Subcommand::ReproSin
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub(crate) fn from_library(e: Error, ctx: &str) -> Self {
        match e {
            Error::NumericalBreakdown(_) => CliError::Numerical(format!("{ctx}: {e}")),
            _ => CliError::Validation(format!("{ctx}: {e}")),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ipmdro",
    version,
    about = "Worst-case expectations over IPM balls"
)]
pub struct Args {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    /// JSON problem file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for the CSV and JSON reports.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the residual thresholds used for pass/fail columns.
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Tolerances from the config, with `--tol` replacing both residual thresholds.
pub fn effective_tolerances(
    cfg: Option<&ProblemConfig>,
    tol: Option<f64>,
) -> Result<Tolerances, CliError> {
    let mut t = cfg.and_then(|c| c.tolerances).unwrap_or_default();
    if let Some(x) = tol {
        if !(x.is_finite() && x > 0.0) {
            return Err(CliError::Validation(format!(
                "--tol must be positive, got {x}"
            )));
        }
        t.exact_check = x;
        t.iterative_check = x;
    }
    Ok(t)
}

pub fn load_config(path: &Path) -> Result<ProblemConfig, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    ProblemConfig::parse(&text)
}

/// Runs one subcommand end to end and writes its reports.
pub fn run(
    cmd: Subcommand,
    config_path: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    tol: Option<f64>,
) -> Result<Report, CliError> {
    let cfg = match config_path {
        Some(p) => Some(load_config(p)?),
        None if cmd.needs_config() => {
            return Err(CliError::Validation(format!(
                "{} needs --config",
                cmd.name()
            )))
        }
        None => None,
    };
    let tolerances = effective_tolerances(cfg.as_ref(), tol)?;
    let seed = seed.or(cfg.as_ref().and_then(|c| c.seed)).unwrap_or(0);
    let report = commands::execute(cmd, cfg.as_ref(), seed, &tolerances)?;
    report.write(out)?;
    Ok(report)
}

/// Parses arguments, runs, prints diagnostics to stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(
        args.subcommand,
        args.config.as_deref(),
        &args.out,
        args.seed,
        args.tol,
    ) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
