// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use deadcore::DeadcoreError;
use thiserror::Error;

/// Free-boundary (dead core) analysis on exterior radial domains.
#[derive(Debug, Parser)]
#[command(name = "deadcore", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: Options,
}

/// Flags shared by every subcommand; each one reads the subset it needs.
#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct Options {
    /// Operator spec (JSON); a field spec for `envelope`.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Solver settings (JSON); individual flags below take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub bc: Option<BcArg>,
    #[arg(long, global = true)]
    pub h: Option<f64>,
    #[arg(long, global = true)]
    pub h_min: Option<f64>,
    #[arg(long, global = true)]
    pub h_max: Option<f64>,
    #[arg(long, global = true)]
    pub h_points: Option<usize>,
    /// Absorption power, 0 < p < 1.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Artifact path; without it only the summary is printed.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub n_max: Option<f64>,
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BcArg {
    Neumann,
    Dirichlet,
}

impl From<BcArg> for deadcore::BcKind {
    fn from(b: BcArg) -> Self {
        match b {
            BcArg::Neumann => deadcore::BcKind::Neumann,
            BcArg::Dirichlet => deadcore::BcKind::Dirichlet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitArg {
    /// Power law for power-law regimes, log transform for log-power regimes.
    Auto,
    Power,
    LogPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftArg {
    Inward,
    Zero,
    Outward,
}

#[derive(Debug, Clone, Subcommand, serde::Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Minimal solution and free-boundary radius for one datum h.
    Solve,
    /// r*(h) over a geometric h range, with a scaling-law fit.
    Sweep {
        #[arg(long, value_enum, default_value_t = FitArg::Auto)]
        fit: FitArg,
    },
    /// Regime of an operator spec from its inferred exponents.
    Classify,
    /// Regime and exponents from (m, drift sign, j, p), or (mu, p) for the
    /// critical inward drift.
    Predict {
        #[arg(long, allow_negative_numbers = true)]
        m: Option<f64>,
        #[arg(long, value_enum)]
        drift_sign: Option<DriftArg>,
        #[arg(long, allow_negative_numbers = true)]
        j: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Numerical r* against the closed form (constant A, Λ, no drift).
    Oracle {
        /// Largest accepted relative error in r*.
        #[arg(long, default_value_t = 1e-2)]
        rel_tol: f64,
    },
    /// Radial envelopes of a non-radial field; with --h also the bracket radii.
    Envelope {
        /// Outer radius of the envelope table, in units of R.
        #[arg(long, default_value_t = 1e3)]
        r_max_ratio: f64,
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        #[arg(long, default_value_t = 256)]
        sphere_samples: usize,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<DeadcoreError> for CliError {
    fn from(e: DeadcoreError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DEADCORE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("DEADCORE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = init_threads().and_then(|_| commands::run(&cli));
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
