//! `morse-cs`: tables and verification for Morse-oscillator coherent states.

mod commands;
mod grid;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use morse_cs::verify::Scope;

use crate::grid::GridSpec;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
/// Tables were produced but some rows carry warnings (e.g. unconverged P series).
pub const EXIT_WARNINGS: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "morse-cs", version, about = "Coherent states of the Morse oscillator")]
pub struct Cli {
    /// Run every sweep on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SpaceArgs {
    /// Number of excited bound states above the ground state.
    #[arg(long, conflicts_with = "molecule", allow_negative_numbers = true)]
    pub l: Option<i64>,
    /// Built-in or file-provided molecule preset (H2, I2).
    #[arg(long)]
    pub molecule: Option<String>,
    /// Extra presets: one `name value-of-2(l+1)` per line.
    #[arg(long)]
    pub preset_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct TemperatureArgs {
    /// Inverse temperatures in units of 1/hbar_omega.
    #[arg(long, conflicts_with = "a_grid")]
    pub beta_grid: Option<GridSpec>,
    /// `A = beta hbar_omega` directly.
    #[arg(long)]
    pub a_grid: Option<GridSpec>,
    #[arg(long, default_value_t = 1.0)]
    pub hbar_omega: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SeriesArgs {
    /// Relative-term stopping tolerance of the P series.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 60)]
    pub kmax: usize,
    /// Gauss-Hermite order of the heat-kernel P route.
    #[arg(long, default_value_t = 96)]
    pub quad_order: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Level index, dimensionless energy and dimensional energy.
    Spectrum {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        hbar_omega: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fock coefficients of one coherent state.
    Coherent {
        #[command(flatten)]
        space: SpaceArgs,
        /// Label `re[,im]`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Photon-number statistics over a grid of x = |Z|^2.
    Stats {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        x_grid: GridSpec,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Thermal Husimi function over (temperature, x).
    Husimi {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        temps: TemperatureArgs,
        #[arg(long)]
        x_grid: GridSpec,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Thermal P-function over (temperature, x), series and heat-kernel routes.
    Pfunction {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        temps: TemperatureArgs,
        #[arg(long)]
        x_grid: GridSpec,
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Partition function, thermal statistics and thermodynamics per temperature.
    Thermal {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        temps: TemperatureArgs,
        /// Also emit a Husimi table on this x grid.
        #[arg(long)]
        husimi_x_grid: Option<GridSpec>,
        /// Also emit a P-function table on this x grid.
        #[arg(long)]
        pfunction_x_grid: Option<GridSpec>,
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the invariant checks and emit a report.
    Verify {
        #[arg(long, value_parser = parse_scope, default_value = "all")]
        scope: Scope,
        /// Comma-separated list of l values.
        #[arg(long, value_delimiter = ',')]
        l: Option<Vec<usize>>,
        /// Override every tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 60)]
        kmax: usize,
        /// Radial quadrature order.
        #[arg(long, default_value_t = 200)]
        quad_order: usize,
        /// A values for the thermal checks.
        #[arg(long)]
        a_grid: Option<GridSpec>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_scope(s: &str) -> Result<Scope, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let echo = std::iter::once("morse-cs".to_string())
        .chain(std::env::args().skip(1))
        .collect::<Vec<_>>()
        .join(" ");
    ExitCode::from(commands::run(cli, &echo))
}
