//! Command-line front end: loads configuration, runs sweeps and fits, and
//! writes CSV or JSON with an embedded run manifest.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
pub mod manifest;
pub mod table;

pub use manifest::{RunManifest, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(
    name = "trapnoise",
    version,
    about = "Electric-field noise models and heating-rate inference for surface ion traps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for sweeps and multi-start fits.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for synthetic data.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Log verbosity (-v warnings and info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thermal near-field noise above a layer stack versus temperature.
    Fdt(FdtArgs),
    /// Johnson-Nyquist noise budget of the electrode wiring.
    Jnn(JnnArgs),
    /// Fit heating-rate or noise data.
    Fit(FitArgs),
    /// Spectral exponent predicted from the temperature slope of the noise.
    Taf(TafArgs),
    /// Share of patch-potential noise from the target surface region.
    Zeta(ZetaArgs),
    /// Synthetic dataset from a parameter file.
    Synth(SynthArgs),
}

#[derive(Debug, clap::Args)]
pub struct FdtArgs {
    /// Stack file.
    #[arg(long)]
    pub config: PathBuf,
    /// Material library overriding the one named in the stack file.
    #[arg(long)]
    pub materials: Option<PathBuf>,
    /// Temperatures in K: start:stop:step or a comma-separated list.
    #[arg(long, default_value = "10:210:10")]
    pub temps: String,
    /// Secular frequency in Hz.
    #[arg(long, default_value_t = 1.0e6)]
    pub omega_hz: f64,
    /// Ion height above the surface in µm.
    #[arg(long, default_value_t = 225.0)]
    pub distance_um: f64,
    /// Relative tolerance of the Green-function integral.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Emit curves for London depths of 80 nm and 635 nm.
    #[arg(long)]
    pub band: bool,
}

#[derive(Debug, clap::Args)]
pub struct JnnArgs {
    /// Circuit file.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "10:210:10")]
    pub temps: String,
    #[arg(long, default_value_t = 1.0e6)]
    pub omega_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    /// Frequency power law at each temperature.
    Freq,
    /// Global simple and piecewise temperature models.
    Temp,
    /// Power-law and Arrhenius surface-noise models.
    Surface,
}

#[derive(Debug, clap::Args)]
pub struct FitArgs {
    /// Heating-rate CSV (temperature_K, f_hz, gamma, sigma) or, for surface
    /// fits, a noise CSV (temperature_K, s_e, sigma).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub model: FitModel,
    /// Plateau tolerance reported with temperature fits.
    #[arg(long, default_value_t = 0.1)]
    pub tolerance: f64,
}

#[derive(Debug, clap::Args)]
pub struct TafArgs {
    /// Noise CSV (temperature_K, s_e, sigma) or heating-rate CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 1.0e6)]
    pub omega_hz: f64,
    /// Hopping attempt time in s.
    #[arg(long, default_value_t = trapnoise::inference::TAU0_DEFAULT)]
    pub tau0: f64,
    /// Measured exponents (temperature_K, alpha, sigma) to test against the prediction.
    #[arg(long)]
    pub alpha: Option<PathBuf>,
    /// Fixed smoothing parameter; chosen by cross-validation when omitted.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, clap::Args)]
pub struct ZetaArgs {
    /// Scene file.
    #[arg(long)]
    pub config: PathBuf,
    /// Weight ratios of the target region: list or start:stop:step.
    #[arg(long)]
    pub ratios: Option<String>,
    /// Patch edge length in µm.
    #[arg(long, default_value_t = 1.0)]
    pub patch_um: f64,
    /// Sum every patch directly instead of integrating the far field.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    /// Parameter file with a [temperature_model] or [surface_model] section.
    #[arg(long)]
    pub config: PathBuf,
    /// Relative Gaussian noise.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Temperatures overriding the file's grid.
    #[arg(long)]
    pub temps: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] trapnoise::Error),
    #[error("data error in {path} at line {line}: {message}")]
    Data { path: String, line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    /// 2 configuration, 3 data, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use trapnoise::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Data { .. } | CliError::Output { .. } => 3,
            CliError::Core(e) => match e {
                E::Config { .. } => 2,
                E::Data { .. } | E::Invalid(_) | E::Domain(_) | E::OutOfRange { .. } => 3,
                E::Fit { .. } | E::Quadrature { .. } | E::PatchBudget { .. } | E::Degenerate { .. } => 4,
            },
        }
    }
}

/// Runs one command and writes its output.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let body = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(|| commands::dispatch(cli))?,
        None => commands::dispatch(cli)?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Output { path: path.display().to_string(), message: e.to_string() }),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(body.as_bytes())
                .map_err(|e| CliError::Output { path: "<stdout>".into(), message: e.to_string() })
        }
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
