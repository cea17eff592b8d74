//! Experiment harness for the `topophase` library: JSON configuration,
//! deterministic CSV tables and JSON metadata sidecars.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::config::{Experiment, RunConfig};
use crate::error::{CliError, EXIT_THRESHOLD};

#[derive(Debug, Parser)]
#[command(
    name = "topophase",
    version,
    about = "Measurement-induced gauge fields and Berry phases"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration; defaults apply to every missing key.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path; metadata goes to <stem>.meta.json. Stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomly drawn evaluation points.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Loop discretization (holonomy, berry).
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Field strength and closed-form-vs-oracle deviation at sample points.
    GaugeCheck(CommonArgs),
    /// Loop phases by line integral, discrete Berry phase and closed form.
    Holonomy(CommonArgs),
    /// Discrete Berry phase at N and 2N samples.
    Berry(CommonArgs),
    /// Geometric phase extracted from the driven spin dynamics.
    Dynamics(CommonArgs),
    /// Pointer shift of a von Neumann measurement.
    Pointer(CommonArgs),
    /// Geometric phase against the adiabaticity ratio.
    Sweep(CommonArgs),
}

impl Command {
    pub fn split(&self) -> (Experiment, &CommonArgs) {
        match self {
            Command::GaugeCheck(a) => (Experiment::GaugeCheck, a),
            Command::Holonomy(a) => (Experiment::Holonomy, a),
            Command::Berry(a) => (Experiment::Berry, a),
            Command::Dynamics(a) => (Experiment::Dynamics, a),
            Command::Pointer(a) => (Experiment::Pointer, a),
            Command::Sweep(a) => (Experiment::Sweep, a),
        }
    }
}

/// Loads the configuration file (if any) and applies command-line overrides.
pub fn resolve_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text).map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
                other => other,
            })?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(samples) = args.samples {
        cfg.samples = samples;
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn colour_enabled() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stderr().is_terminal()
}

fn diagnostic(level: &str, colour: &str, message: &str) {
    if colour_enabled() {
        eprintln!("\x1b[{colour}m{level}\x1b[0m: {message}");
    } else {
        eprintln!("{level}: {message}");
    }
}

fn execute(cli: &Cli) -> Result<Vec<String>, CliError> {
    let (experiment, args) = cli.command.split();
    let cfg = resolve_config(args)?;
    let report = experiments::run(experiment, &cfg)?;
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    output::write_report(&report, &cfg, cfg.output.as_deref(), timestamp)?;
    if let Some(path) = &cfg.output {
        diagnostic(
            "info",
            "36",
            &format!(
                "{experiment}: {} rows written to {}",
                report.table.rows.len(),
                path.display()
            ),
        );
    }
    Ok(report.failures)
}

/// Runs a parsed command and maps the outcome to the process exit code.
pub fn run_cli(cli: &Cli) -> ExitCode {
    match execute(cli) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in &failures {
                diagnostic("threshold", "33", f);
            }
            ExitCode::from(EXIT_THRESHOLD)
        }
        Err(e) => {
            diagnostic("error", "31", &e.to_string());
            ExitCode::from(e.exit_code())
        }
    }
}
