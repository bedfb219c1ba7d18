use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const OUT_DIR_ENV: &str = "COLLAPSE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "collapse", version, about = "Collapse-model simulation, predictions and exclusion bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a trajectory ensemble and write observables, statistics and provenance.
    Simulate(SimulateArgs),
    /// Evaluate a closed-form CSL prediction and print it as JSON.
    #[command(subcommand)]
    Predict(PredictCommand),
    /// Turn experiment records into an excluded CSL region (CSV + SVG).
    Exclude(ExcludeArgs),
    /// Recompute the config hash and artifact digests of an output directory.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum PredictCommand {
    /// Fringe-visibility reduction factor.
    Contrast(ContrastArgs),
    /// Bulk heating power, W.
    Heating(HeatingArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Named parameter point: GRW, Adler-A, Adler-B or DP-Diosi.
    #[arg(long, conflicts_with_all = ["lambda", "rc_m", "r0_m"])]
    pub preset: Option<String>,
    /// CSL collapse rate, 1/s.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// CSL correlation length, m.
    #[arg(long = "rc-m")]
    pub rc_m: Option<f64>,
    /// DP regularization length, m.
    #[arg(long = "r0-m", conflicts_with_all = ["lambda", "rc_m"])]
    pub r0_m: Option<f64>,
}

impl ModelArgs {
    pub fn is_empty(&self) -> bool {
        self.preset.is_none() && self.lambda.is_none() && self.rc_m.is_none() && self.r0_m.is_none()
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct MassArgs {
    /// Particle mass, kg.
    #[arg(long = "mass-kg", conflicts_with = "mass_amu")]
    pub mass_kg: Option<f64>,
    /// Particle mass, unified atomic mass units.
    #[arg(long = "mass-amu")]
    pub mass_amu: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianKind {
    Zero,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    TwoPoint,
    Gaussian,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    /// JSON config file; flags take precedence over its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub mass: MassArgs,
    /// Total simulated time, s.
    #[arg(long = "time-s", alias = "time")]
    pub time_s: Option<f64>,
    /// Number of time steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Grid points (power of two, at least 8).
    #[arg(long = "grid-points")]
    pub grid_points: Option<usize>,
    /// Grid spacing, m.
    #[arg(long = "dx-m")]
    pub dx_m: Option<f64>,
    #[arg(long, value_enum)]
    pub hamiltonian: Option<HamiltonianKind>,
    #[arg(long, value_enum)]
    pub initial: Option<InitialKind>,
    /// Superposition separation (two-point) or tracked pair distance, m.
    #[arg(long = "separation-m", alias = "separation")]
    pub separation_m: Option<f64>,
    /// Gaussian packet width, m.
    #[arg(long = "width-m")]
    pub width_m: Option<f64>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Record observables every this many steps.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Output directory (must exist); defaults to $COLLAPSE_OUT_DIR.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ContrastArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub mass: MassArgs,
    /// Free-flight time, s.
    #[arg(long = "time-s", alias = "time")]
    pub time_s: Option<f64>,
    /// Superposition separation, m.
    #[arg(long = "separation-m", alias = "separation")]
    pub separation_m: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct HeatingArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub mass: MassArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ExcludeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON array of experiment records.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Smallest rC on the grid, m.
    #[arg(long = "rc-min-m")]
    pub rc_min_m: Option<f64>,
    /// Largest rC on the grid, m.
    #[arg(long = "rc-max-m")]
    pub rc_max_m: Option<f64>,
    #[arg(long = "rc-points")]
    pub rc_points: Option<usize>,
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Directory containing provenance.json.
    pub dir: PathBuf,
}
