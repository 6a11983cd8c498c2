//! Command-line front end of the `fdnoma` simulator.
//!
//! `fdnoma simulate|analytic|validate` take an experiment from `--config`,
//! a `--preset` or the built-in defaults, apply `--set key=value` overrides
//! and write CSV. `fdnoma preset` lists or dumps the embedded presets.
//!
//! Exit codes: 0 success, 1 validation mismatch or numerical failure,
//! 2 usage or configuration error.

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fdnoma::mc::RunOptions;
use fdnoma::model::derive_scalars;
use serde_json::Value;

use crate::config::{apply_overrides, parse_experiments, read_config, ExperimentConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Engine(fdnoma::Error),
    #[error("{0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0} check(s) failed")]
    Mismatch(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Engine(_) | CliError::Numeric(_) | CliError::Io(_) | CliError::Mismatch(_) => 1,
        }
    }
}

impl From<fdnoma::Error> for CliError {
    fn from(e: fdnoma::Error) -> Self {
        match e {
            fdnoma::Error::InvalidParams { .. } | fdnoma::Error::UnknownAxis { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Engine(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "fdnoma", version, about = "Outage simulator for full-duplex relay cooperative NOMA")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo outage estimates.
    Simulate(RunArgs),
    /// Analytic outage values and bounds.
    Analytic(RunArgs),
    /// Compare both engines point by point.
    Validate(RunArgs),
    /// List presets, or print one as JSON.
    Preset { name: Option<String> },
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON experiment file (object or array of objects).
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Embedded experiment set: fig2, fig3, fig4 or fig5.
    #[arg(long)]
    pub preset: Option<String>,
    /// Override a config key; repeatable. Values are JSON or bare strings.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores). Never changes results.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long)]
    pub quadrature_m: Option<usize>,
    /// Output CSV path; standard output by default.
    #[arg(long)]
    pub out: Option<String>,
    /// Print the effective config as JSON and exit.
    #[arg(long)]
    pub show_config: bool,
}

impl RunArgs {
    /// Effective experiments after presets, files and overrides.
    pub fn experiments(&self) -> Result<Vec<ExperimentConfig>, CliError> {
        let mut value = if let Some(path) = &self.config {
            read_config(path)?
        } else if let Some(name) = &self.preset {
            let exps = presets::get(name).ok_or_else(|| {
                CliError::Usage(format!("unknown preset `{name}`; available: {}", presets::NAMES.join(", ")))
            })?;
            serde_json::to_value(exps).expect("configs serialize")
        } else {
            Value::Object(Default::default())
        };
        let mut overrides = self.set.clone();
        if let Some(t) = self.trials {
            overrides.push(format!("trials={t}"));
        }
        if let Some(s) = self.seed {
            overrides.push(format!("seed={s}"));
        }
        if let Some(m) = self.quadrature_m {
            overrides.push(format!("quadrature_m={m}"));
        }
        apply_overrides(&mut value, &overrides)?;
        let exps = parse_experiments(value)?;
        for (i, e) in exps.iter().enumerate() {
            e.validate().map_err(|err| {
                let name = if e.label.is_empty() { i.to_string() } else { format!("`{}`", e.label) };
                CliError::Config(format!("experiment {name}: {}", strip_prefix(&err)))
            })?;
        }
        Ok(exps)
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions { workers: self.workers, ..RunOptions::default() }
    }

    fn out_path<'a>(&'a self, exps: &'a [ExperimentConfig]) -> Option<&'a str> {
        self.out.as_deref().or_else(|| exps.first().and_then(|e| e.out.as_deref()))
    }
}

fn strip_prefix(err: &CliError) -> String {
    match err {
        CliError::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

/// Pretty JSON of the effective config: one object or an array.
pub fn config_json(exps: &[ExperimentConfig]) -> String {
    let v = if exps.len() == 1 {
        serde_json::to_value(&exps[0])
    } else {
        serde_json::to_value(exps)
    };
    serde_json::to_string_pretty(&v.expect("configs serialize")).expect("json")
}

/// Runs a parsed command, writing reports to `stderr`.
pub fn execute(cli: Cli, stderr: &mut dyn Write) -> Result<(), CliError> {
    let (args, kind) = match cli.command {
        Command::Preset { name: None } => {
            let mut out = output::sink(None)?;
            for n in presets::NAMES {
                writeln!(out, "{n}")?;
            }
            return Ok(());
        }
        Command::Preset { name: Some(name) } => {
            let exps = presets::get(&name).ok_or_else(|| {
                CliError::Usage(format!("unknown preset `{name}`; available: {}", presets::NAMES.join(", ")))
            })?;
            let mut out = output::sink(None)?;
            writeln!(out, "{}", config_json(&exps))?;
            return Ok(());
        }
        Command::Simulate(a) => (a, "simulate"),
        Command::Analytic(a) => (a, "analytic"),
        Command::Validate(a) => (a, "validate"),
    };
    let exps = args.experiments()?;
    if args.show_config {
        let mut out = output::sink(None)?;
        writeln!(out, "{}", config_json(&exps))?;
        return Ok(());
    }
    let out = output::sink(args.out_path(&exps))?;
    match kind {
        "simulate" => commands::simulate(&exps, args.run_options(), out),
        "analytic" => commands::analytic(&exps, out),
        _ => match commands::validate_with(&exps, args.run_options(), derive_scalars, out, stderr)? {
            0 => Ok(()),
            n => Err(CliError::Mismatch(n)),
        },
    }
}

/// Parses `args` and runs, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut stderr = std::io::stderr().lock();
    match execute(cli, &mut stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "fdnoma: {e}");
            e.exit_code()
        }
    }
}
