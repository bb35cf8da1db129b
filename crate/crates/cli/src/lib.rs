//! Command-line front end for `dmspec`.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;
pub mod verify;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use dmspec::SpectrumApprox;
use serde::Serialize;

use config::RunConfig;
use output::{write_report, Format, Tabular};

#[derive(Debug, Parser)]
#[command(name = "dmspec", version, about = "Spectra, density of states and rotation numbers for doubling-map potentials")]
pub struct Cli {
    /// JSON run configuration (sampling function plus "command" parameters)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout if absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write an SVG figure here
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    /// Worker threads, 0 for all cores
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bands of every periodic orbit and their merged union
    Bands {
        #[arg(long)]
        max_period: Option<u32>,
    },
    /// Merged union of periodic spectra
    Spectrum {
        #[arg(long)]
        max_period: Option<u32>,
    },
    /// Interior gaps of the union, longest first
    Gaps {
        #[arg(long)]
        max_period: Option<u32>,
    },
    /// Integrated density of states on an energy grid
    Ids {
        /// Truncation size N
        #[arg(long)]
        size: Option<usize>,
        /// Number of random starting points M
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Rotation numbers of the stable section with integrality verdicts
    Rotation {
        /// Energy to evaluate (repeatable)
        #[arg(long = "energy", allow_negative_numbers = true)]
        energies: Vec<f64>,
    },
    /// Run the end-to-end checks; exit code 1 if any fails
    Verify {
        #[arg(long)]
        max_period: Option<u32>,
    },
}

/// Failure classes, mapped to exit codes 2 and 1.
#[derive(Debug)]
pub enum CliError {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) | CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<dmspec::Error> for CliError {
    fn from(e: dmspec::Error) -> Self {
        use dmspec::Error::*;
        match e {
            InvalidParameter(_)
            | InvalidSamplingFunction(_)
            | CapacityExceeded { .. }
            | MissingDigits
            | InsufficientDigits { .. }
            | EmptyGapGrid { .. } => CliError::Config(e.into()),
            _ => CliError::Runtime(e.into()),
        }
    }
}

fn config_err(e: anyhow::Error) -> CliError {
    CliError::Config(e)
}

fn runtime_err(e: anyhow::Error) -> CliError {
    CliError::Runtime(e)
}

fn emit<T: Serialize + Tabular>(cli: &Cli, report: &T) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))
                .map_err(config_err)?;
            write_report(report, cli.format, BufWriter::new(file)).map_err(runtime_err)
        }
        None => write_report(report, cli.format, io::stdout().lock()).map_err(runtime_err),
    }
}

fn write_plot(cli: &Cli, svg: impl FnOnce() -> Result<String, CliError>) -> Result<(), CliError> {
    if let Some(path) = &cli.plot {
        let text = svg()?;
        let mut file = File::create(path)
            .with_context(|| format!("cannot create {}", path.display()))
            .map_err(config_err)?;
        file.write_all(text.as_bytes())
            .context("writing plot")
            .map_err(runtime_err)?;
    }
    Ok(())
}

/// One row per period (orbits of exactly that period, merged) and a final
/// row for the full union.
fn band_figure(config: &RunConfig) -> Result<String, CliError> {
    let report = commands::bands(config)?;
    let tol = config.command.tol;
    let mut rows = Vec::new();
    for p in 1..=config.command.max_period {
        let bands = report
            .orbits
            .iter()
            .filter(|o| o.period == p)
            .flat_map(|o| o.bands.iter().copied())
            .collect();
        let merged = SpectrumApprox::from_bands(bands, p, tol)?;
        rows.push((format!("p = {p}"), merged.bands));
    }
    rows.push(("union".to_string(), report.spectrum.bands.clone()));
    Ok(svg::band_rows(&rows, "periodic spectra by period"))
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(config_err)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let c = &mut config.command;
    match &cli.command {
        Command::Bands { max_period }
        | Command::Spectrum { max_period }
        | Command::Gaps { max_period }
        | Command::Verify { max_period } => {
            if let Some(p) = max_period {
                c.max_period = *p;
            }
        }
        Command::Ids { size, samples } => {
            if let Some(n) = size {
                c.truncation_size = *n;
            }
            if let Some(m) = samples {
                c.samples = *m;
            }
        }
        Command::Rotation { energies } => {
            if !energies.is_empty() {
                c.energies = energies.clone();
            }
        }
    }
    config.validate().map_err(config_err)?;
    Ok(config)
}

/// Runs a parsed command. `Ok(false)` means `verify` found a failing check.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    let config = load_config(cli)?;
    if cli.threads > 0 {
        // fails only if a pool already exists, e.g. on a second call in-process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match &cli.command {
        Command::Bands { .. } => {
            emit(cli, &commands::bands(&config)?)?;
            write_plot(cli, || band_figure(&config))?;
        }
        Command::Spectrum { .. } => {
            emit(cli, &commands::spectrum(&config)?)?;
            write_plot(cli, || band_figure(&config))?;
        }
        Command::Gaps { .. } => {
            emit(cli, &commands::gaps(&config)?)?;
            write_plot(cli, || band_figure(&config))?;
        }
        Command::Ids { .. } => {
            let (report, spectrum) = commands::ids(&config)?;
            emit(cli, &report)?;
            write_plot(cli, || Ok(svg::ids_staircase(&report.table, &spectrum)))?;
        }
        Command::Rotation { .. } => {
            if cli.plot.is_some() {
                eprintln!("warning: rotation has no figure; --plot ignored");
            }
            emit(cli, &commands::rotation(&config)?)?;
        }
        Command::Verify { .. } => {
            if cli.plot.is_some() {
                eprintln!("warning: verify has no figure; --plot ignored");
            }
            let report = verify::verify(&config)?;
            emit(cli, &report)?;
            return Ok(report.passed);
        }
    }
    Ok(true)
}

/// Parses `args` and runs; the process exit code follows the CLI contract.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
