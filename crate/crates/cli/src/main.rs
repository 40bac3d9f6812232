//! `dkg`: command-line driver for the lattice toolkit.
//!
//! Every subcommand reads an optional TOML file (`--config`) and then
//! applies `--set key=value` overrides, so any value can come from either.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad or missing configuration; exit code 2.
    Config(String),
    /// The numerics failed on valid input; exit code 3.
    Numerical(String),
    /// Writing results failed; exit code 1.
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<dkg_core::Error> for CliError {
    fn from(e: dkg_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else if let dkg_core::Error::Io(m) = e {
            CliError::Io(m)
        } else {
            CliError::Config(e.to_string())
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

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(short, long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set grid.tau=0.4`.
    /// Dotted keys reach nested tables, numeric segments index arrays.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output path; shorthand for `--set output=PATH`.
    #[arg(short, long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "dkg", version, about = "Discrete nonlinear Klein-Gordon lattice toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve initial data; writes diagnostics, the origin series and snapshots.
    Simulate(#[command(flatten)] Common),
    /// Construct a one-, two- or four-frequency solitary wave.
    Soliton(#[command(flatten)] Common),
    /// Tabulate the lattice Green's function on a box.
    Green(#[command(flatten)] Common),
    /// Windowed spectra of an origin series.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Series CSV with columns t,re,im (the `series` key).
        series: Option<PathBuf>,
    },
    /// Check the circle convolution theorems on a JSON list of atoms.
    TitchmarshCheck {
        #[command(flatten)]
        common: Common,
        /// JSON list of atoms (the `atoms` key).
        atoms: Option<PathBuf>,
    },
    /// Run attractor experiments over a parameter grid.
    Sweep(#[command(flatten)] Common),
    /// Time-step thresholds of a potential.
    Thresholds(#[command(flatten)] Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    use commands::*;
    match cli.command {
        Command::Simulate(c) => simulate::run(&c),
        Command::Soliton(c) => soliton::run(&c),
        Command::Green(c) => green::run(&c),
        Command::Spectrum { common, series } => spectrum::run(&common, series),
        Command::TitchmarshCheck { common, atoms } => titchmarsh::run(&common, atoms),
        Command::Sweep(c) => sweep::run(&c),
        Command::Thresholds(c) => thresholds::run(&c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dkg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
