//! Command-line front end: `spinpump [--config FILE] <scan|sweep|fit|synth>`.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 solver error,
//! 4 fit failure (partial results are still written).

mod commands;
pub mod config;
pub mod plot;
pub mod table;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use crate::fit::FitError;
use crate::quantum::SolverError;
use crate::scan::ScanError;

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_FIT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "spinpump",
    version,
    about = "Pump-repump resonance simulation and quantum-dot spectrum fitting",
    after_help = config::keys_help(config::SECTIONS)
)]
pub struct Cli {
    /// TOML configuration file; absent keys take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory receiving the output files.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Print the effective configuration (after command-line overrides) as
    /// TOML and exit without running.
    #[arg(long, global = true)]
    pub dump_config: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Gfactor,
    Power,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detuning scan of the detected population; writes scan.csv.
    #[command(after_help = config::keys_help(&["system", "scan"]))]
    Scan {
        /// Override system.rabi_ghz.
        #[arg(long, value_name = "GHZ")]
        omega_ghz: Option<f64>,
        /// Also write scan.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Hole g-factor sweep (raw and row-normalized long-format CSVs) or drive
    /// power sweep (FWHM and peak per Ω).
    #[command(after_help = config::keys_help(&["system", "scan", "sweep"]))]
    Sweep {
        #[arg(long, value_enum)]
        mode: SweepMode,
        /// Override system.rabi_ghz (g-factor mode).
        #[arg(long, value_name = "GHZ")]
        omega_ghz: Option<f64>,
        /// Also write SVG charts.
        #[arg(long)]
        plot: bool,
    },
    /// Fit measured or synthetic data; writes fit_{kind}.csv.
    #[command(after_help = config::keys_help(&["fit"]))]
    Fit {
        #[command(subcommand)]
        kind: FitCommand,
    },
    /// Write synthetic spectra, one CSV per (field, polarization).
    #[command(after_help = config::keys_help(&["synth"]))]
    Synth {
        /// Override synth.seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum FitCommand {
    /// Lorentzian multi-peak fit of one spectrum.
    #[command(after_help = config::keys_help(&["fit"]))]
    Peaks {
        input: PathBuf,
        /// Fixed number of peaks; otherwise fit.peak_candidates are tried.
        #[arg(long)]
        peaks: Option<usize>,
    },
    /// Quadruplet series over field: diamagnetic shift and g factors.
    Zeeman {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Fine-structure splitting from zero-field H and V spectra.
    Fss { h: PathBuf, v: PathBuf },
    /// Saturation curve I = I_max·P/(P + P_sat).
    Saturation {
        input: PathBuf,
        /// Power column (default: first column).
        #[arg(long)]
        x_col: Option<String>,
        /// Intensity column (default: second column).
        #[arg(long)]
        y_col: Option<String>,
    },
    /// Linear and square-root power-broadening models.
    Broadening {
        input: PathBuf,
        /// Power column (default: first column).
        #[arg(long)]
        x_col: Option<String>,
        /// Width column (default: second column).
        #[arg(long)]
        y_col: Option<String>,
    },
    /// Product versus sum of displaced Lorentzians on a scan CSV.
    Resonance {
        input: PathBuf,
        /// Displacement s in GHz; defaults to |δ_e − δ_h|/2π from the file
        /// metadata.
        #[arg(long, value_name = "GHZ")]
        splitting_ghz: Option<f64>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(String),
    Fit(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Fit(_) => EXIT_FIT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
            CliError::Fit(m) => write!(f, "fit error: {m}"),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::InvalidGrid(m) => CliError::Usage(m),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        CliError::Fit(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    match &cli.command {
        Some(Command::Scan { omega_ghz: Some(o), .. }) | Some(Command::Sweep { omega_ghz: Some(o), .. }) => {
            cfg.system.rabi_ghz = *o
        }
        Some(Command::Synth { seed: Some(s) }) => cfg.synth.seed = *s,
        _ => {}
    }
    cfg.validate().map_err(CliError::Usage)?;
    Ok(cfg)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    if cli.dump_config {
        print!("{}", cfg.to_toml());
        return EXIT_OK;
    }
    let Some(command) = &cli.command else {
        let _ = Cli::command().print_help();
        return EXIT_USAGE;
    };
    match commands::dispatch(command, &cfg, &cli.out_dir) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
