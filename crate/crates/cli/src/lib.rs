//! Command-line front end for the `lame-susy` library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use output::{Format, SampledCurve};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNSUPPORTED: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Tag written to every output describing the lattice convention.
pub const NORMALIZATION: &str = "e1+e2+e3=0, e1-e3=1, omega=K, omega'=iK', z=x-iK'";

#[derive(Debug, Parser)]
#[command(name = "lame-susy", version, about = "Bloch solutions, SUSY partners and band spectra of associated Lame potentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic band edges next to the ones located by the Hill discriminant.
    BandEdges(BandEdgesArgs),
    /// Sample the two Bloch solutions at one energy.
    Bloch(BlochArgs),
    /// Sample a SUSY partner potential.
    Partner(PartnerArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
    /// Data for one of the two reference figures.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long, default_value_t = 1)]
    pub ell: u32,
    #[arg(long, default_value_t = 0.99)]
    pub k2: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct BandEdgesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Defaults to -4K.
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    /// Defaults to 4K.
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BlochArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub energy: f64,
    #[command(flatten)]
    pub sample: SampleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PartnerArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Factorization energy.
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Seed mixing psi1 + lambda psi2; 0 and "inf" give periodic partners.
    #[arg(long, allow_negative_numbers = true, value_parser = parse_lambda)]
    pub lambda: f64,
    /// Accept factorization energies above the ground state.
    #[arg(long)]
    pub allow_unsafe: bool,
    #[command(flatten)]
    pub sample: SampleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
    Elliptic,
    Solutions,
    Susy,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    /// Perturb the ansatz coefficients to check that the residual test bites.
    #[arg(long, hide = true)]
    pub inject_bug: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    Figure1,
    Figure2,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub name: FigureName,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn parse_lambda(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        other => match other.parse::<f64>() {
            Ok(v) if v.is_nan() => Err("lambda must not be NaN".into()),
            Ok(v) => Ok(v),
            Err(e) => Err(format!("'{s}': {e}")),
        },
    }
}
