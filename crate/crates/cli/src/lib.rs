//! Experiment runner for `sparsesv`.
//!
//! Each subcommand reads an [`ExperimentConfig`], applies flag and
//! environment overrides (prefix `SPARSESV_`), runs under a wall-clock
//! limit and writes CSV, JSON or an aligned table. Every artifact starts with
//! a header echoing the effective config, so a run can be repeated from its
//! output alone.
//!
//! Exit codes: 0 success, 1 a check failed, 2 configuration or I/O error,
//! 3 numerical failure, 4 time limit exceeded.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::sync::mpsc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use sparsesv::bounds::BoundsError;
use sparsesv::ensemble::EnsembleError;
use sparsesv::geometry::GeometryError;
use sparsesv::probe::ProbeError;
use sparsesv::spectra::SpectraError;
use thiserror::Error;

pub use commands::{execute, Artifact, Report};
pub use config::{Experiment, ExperimentConfig, Format, SweepAxis};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_TIMEOUT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<ProbeError> for CliError {
    fn from(e: ProbeError) -> Self {
        match e {
            ProbeError::Spectra(s) => s.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::NetCertification { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sparsesv", version, about = "Smallest singular values of sparse random matrices")]
pub struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true, env = "SPARSESV_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "SPARSESV_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "SPARSESV_TRIALS")]
    pub trials: Option<u64>,
    /// Output directory; stdout when absent.
    #[arg(long, global = true, env = "SPARSESV_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, env = "SPARSESV_FORMAT")]
    pub format: Option<Format>,
    /// Interval level is 1 - alpha.
    #[arg(long, global = true, env = "SPARSESV_ALPHA")]
    pub alpha: Option<f64>,
    #[arg(long, global = true, env = "SPARSESV_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, env = "SPARSESV_C_SBP")]
    pub c_sbp: Option<f64>,
    #[arg(long, global = true, env = "SPARSESV_C_BE")]
    pub c_be: Option<f64>,
    #[arg(long, global = true, env = "SPARSESV_C_ABS")]
    pub c_abs: Option<f64>,
    /// Seconds before the run is abandoned.
    #[arg(long, global = true, env = "SPARSESV_TIME_LIMIT")]
    pub time_limit: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Analytic verdicts on conditions (i), (iii), (iv).
    CheckConditions,
    /// Draw matrices.
    Sample,
    /// Singular values of sampled matrices.
    Spectrum,
    /// Constants table with hypothesis gates.
    #[command(alias = "verify-bounds")]
    Constants,
    /// Tail estimates of s_n over a grid of delta, row fill or threshold.
    TailSweep,
    /// Small-ball lower bound against exact or Monte Carlo probabilities.
    SmallBall,
    /// Certified epsilon-net of the sphere or ball.
    Net,
    /// Every applicable inequality for the configured ensemble.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckConditions => "check-conditions",
            Command::Sample => "sample",
            Command::Spectrum => "spectrum",
            Command::Constants => "constants",
            Command::TailSweep => "tail-sweep",
            Command::SmallBall => "small-ball",
            Command::Net => "net",
            Command::Verify => "verify",
        }
    }

    pub fn default_format(self) -> Format {
        match self {
            Command::CheckConditions | Command::Verify => Format::Json,
            Command::Constants => Format::Text,
            _ => Format::Csv,
        }
    }
}

/// Effective config: file, then flags and environment on top.
pub fn resolve(cli: &Cli) -> Result<(ExperimentConfig, Experiment, Format), CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    let name = cli.command.name();
    // A config written for another subcommand still supplies the ensemble.
    let experiment = match config.experiment.take() {
        Some(e) if e.name() == name => e,
        Some(e) => {
            eprintln!("sparsesv: note: ignoring [experiment] `{}`, running `{name}` with its defaults", e.name());
            Experiment::default_for(name)
        }
        None => Experiment::default_for(name),
    };
    if let Some(v) = cli.seed {
        config.seed = v;
    }
    if let Some(v) = cli.trials {
        config.trials = v;
    }
    if let Some(v) = cli.alpha {
        config.alpha = v;
    }
    if let Some(v) = cli.threads {
        config.threads = Some(v);
    }
    if let Some(v) = cli.time_limit {
        config.time_limit = v;
    }
    if let Some(v) = cli.c_sbp {
        config.constants.c_sbp = v;
    }
    if let Some(v) = cli.c_be {
        config.constants.c_be = v;
    }
    if let Some(v) = cli.c_abs {
        config.constants.c_abs = v;
    }
    if cli.out.is_some() {
        config.output.dir = cli.out.clone();
    }
    let format = cli.format.or(config.output.format).unwrap_or(cli.command.default_format());
    config.output.format = Some(format);
    config.experiment = Some(experiment.clone());
    config.validate()?;
    Ok((config, experiment, format))
}

/// Runs one invocation and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match run_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sparsesv: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(cli: &Cli) -> Result<i32, CliError> {
    let (config, experiment, format) = resolve(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let limit = Duration::from_secs_f64(config.time_limit);

    let (tx, rx) = mpsc::channel();
    let worker_config = config.clone();
    std::thread::spawn(move || {
        let result = pool.install(|| execute(&worker_config, &experiment, format));
        let _ = tx.send(result);
    });
    let report = match rx.recv_timeout(limit) {
        Ok(r) => r?,
        Err(mpsc::RecvTimeoutError::Timeout) => {
            eprintln!("sparsesv: time limit of {}s exceeded; nothing written", config.time_limit);
            return Ok(EXIT_TIMEOUT);
        }
        Err(mpsc::RecvTimeoutError::Disconnected) => {
            return Err(CliError::Numerical("worker thread panicked".into()));
        }
    };

    match &config.output.dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for a in &report.artifacts {
                let path = dir.join(&a.file_name);
                std::fs::write(&path, &a.contents)?;
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            for a in &report.artifacts {
                out.write_all(&a.contents)?;
            }
            out.flush()?;
        }
    }
    if report.failures > 0 {
        eprintln!("sparsesv: {} check(s) failed", report.failures);
        Ok(EXIT_FAILURES)
    } else {
        Ok(EXIT_OK)
    }
}
