//! Command-line arguments and the validated run configuration embedded in
//! every output file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use tilelat_core::exactvec::{format_rational, PNorm, PowThreshold, Rational};

use crate::error::CliError;
use crate::format::FORMAT_VERSION;

#[derive(Debug, Parser)]
#[command(name = "tilelat", version, about = "Build separated dense subgroups of l_p and certify their tilings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the greedy construction and write a group file.
    Build(BuildArgs),
    /// Certify properties of a stored group.
    Verify(VerifyArgs),
    /// Voronoi cell of a site as an exact half-space polytope (p = 2).
    Voronoi(VoronoiArgs),
    /// Tiling statistics as JSON plus a CSV of plot data.
    Report(ReportArgs),
    /// Free basis of a generated group, with a membership transcript.
    Basis(BasisArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeArg {
    Grid,
    Stream,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    #[value(name = "exact_lp")]
    ExactLp,
    #[value(name = "riesz_general")]
    RieszGeneral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckArg {
    Separation,
    Density,
    VertexContact,
    PointFiniteness,
}

impl CheckArg {
    pub fn name(self) -> &'static str {
        match self {
            CheckArg::Separation => "separation",
            CheckArg::Density => "density",
            CheckArg::VertexContact => "vertex-contact",
            CheckArg::PointFiniteness => "point-finiteness",
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub steps: u64,
    #[arg(long, value_enum, default_value = "grid")]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "exact_lp")]
    pub mode: ModeArg,
    /// Riesz tolerance (riesz_general only).
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Halve the Riesz tolerance at every step.
    #[arg(long)]
    pub halving: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum, required = true)]
    pub checks: Vec<CheckArg>,
    #[arg(long)]
    pub group: PathBuf,
    /// Separation threshold c (the p-th power of the distance). Default 2.
    #[arg(long)]
    pub threshold: Option<String>,
    #[arg(long)]
    pub strict: bool,
    /// Density radius c for `density`, tile radius c for `point-finiteness`. Default 1.
    #[arg(long)]
    pub radius: Option<String>,
    #[arg(long, default_value_t = 500)]
    pub samples: u64,
    /// Largest admissible tile count for `point-finiteness`.
    #[arg(long, default_value_t = 2)]
    pub bound: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VoronoiArgs {
    #[arg(long)]
    pub group: PathBuf,
    /// Density radius c bounding the cell. Default 1.
    #[arg(long)]
    pub radius: Option<String>,
    /// Separation threshold c for the inner inclusion. Default 2.
    #[arg(long)]
    pub threshold: Option<String>,
    /// Site of the cell as a vector literal, e.g. `[[0,"1/1"]]`. Default 0.
    #[arg(long)]
    pub site: Option<String>,
    /// Number of seeded directions for the outer inclusion.
    #[arg(long, default_value_t = 100)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub group: PathBuf,
    /// Tile radius c. Default 1.
    #[arg(long)]
    pub radius: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON output; the CSV goes next to it with extension `.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    /// Group file whose generators are used.
    #[arg(long, conflicts_with_all = ["generators", "matrix"])]
    pub group: Option<PathBuf>,
    /// JSON list of vectors.
    #[arg(long, conflicts_with = "matrix")]
    pub generators: Option<PathBuf>,
    /// Integer matrix file; its rows are the generators.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything needed to reproduce a run. Unused fields stay `null`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunConfig {
    pub format_version: u32,
    pub command: String,
    pub checks: Vec<String>,
    pub p: Option<u32>,
    pub steps: Option<u64>,
    pub seed: Option<u64>,
    pub scheme: Option<SchemeArg>,
    pub mode: Option<ModeArg>,
    pub epsilon: Option<String>,
    pub halving: bool,
    pub thresholds: Vec<String>,
    pub strict: bool,
    pub radius: Option<String>,
    pub site: Option<String>,
    pub samples: Option<u64>,
    pub bound: Option<u64>,
    pub group: Option<String>,
    pub generators: Option<String>,
    pub matrix: Option<String>,
    pub out: Option<String>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig { format_version: FORMAT_VERSION, command: command.to_string(), ..Default::default() }
    }
}

pub fn path_string(p: &std::path::Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Parses a command-line rational: an integer or `a/b` (reduced on input).
pub fn parse_cli_rational(flag: &str, s: &str) -> Result<Rational, CliError> {
    let bad = || CliError::Config(format!("--{flag}: `{s}` is not a rational number"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn parse_threshold(flag: &str, s: Option<&str>, default: u64) -> Result<PowThreshold, CliError> {
    match s {
        None => Ok(PowThreshold::from_integer(default)),
        Some(s) => PowThreshold::new(parse_cli_rational(flag, s)?)
            .map_err(|_| CliError::Config(format!("--{flag} must be non-negative"))),
    }
}

pub fn parse_norm(p: u32) -> Result<PNorm, CliError> {
    PNorm::new(p).map_err(|e| CliError::Config(format!("--p: {e}")))
}

pub fn threshold_text(t: &PowThreshold) -> String {
    format_rational(t.value())
}
