use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "frameforge", version, about = "Exponential frames near the critical density")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sampling set for a spectrum on the line.
    Synth(SynthArgs),
    /// Sampling set for a spectrum in a finite abelian group.
    GroupSynth(GroupSynthArgs),
    /// Barrier sparsification of a Parseval frame.
    Sparsify(SparsifyArgs),
    /// Row selection for a matrix with orthonormal columns.
    Select(SelectArgs),
    /// Compare frame bounds before and after lifting through a quotient.
    LiftCheck(LiftArgs),
    /// Window estimates of Beurling densities.
    Density(DensityArgs),
    /// Sampling demo for a Paley–Wiener function with cell-wise constant spectrum.
    PwDemo(PwDemoArgs),
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Seed for the quantizer and demo data.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Quantization trials per level.
    #[arg(long, default_value_t = 16)]
    pub trials: usize,
    /// Also write `<out>.timing.json` (and fill the CSV `wall_ms` column).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Spectrum file; repeat for several sweep instances.
    #[arg(long, required = true)]
    pub spectrum: Vec<PathBuf>,
    #[arg(long, required_unless_present = "sweep_epsilon")]
    pub epsilon: Option<f64>,
    #[arg(long, required_unless_present = "sweep_epsilon")]
    pub out: Option<PathBuf>,
    /// Cover slack for interval spectra.
    #[arg(long, default_value_t = 0.1)]
    pub slack: f64,
    /// Add a sampling demo with random cell coefficients.
    #[arg(long)]
    pub demo_pw: bool,
    /// Truncation `L` for the demo sums.
    #[arg(long = "L", default_value_t = 64)]
    pub l: u64,
    /// Comma-separated epsilons; writes one CSV row per (epsilon, spectrum).
    #[arg(long, value_delimiter = ',', requires = "csv")]
    pub sweep_epsilon: Option<Vec<f64>>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GroupSynthArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Recompute the bounds from the full frame operator on `L²(Ω)`.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SparsifyArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub d: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also quantize the weights to this operator-norm tolerance.
    #[arg(long)]
    pub quantize: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Compare with exhaustive search (at most 16 rows).
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Points file or sampling-set file.
    #[arg(long)]
    pub points: PathBuf,
    /// Comma-separated window lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PwDemoArgs {
    /// Grid spectrum file.
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "L", default_value_t = 64)]
    pub l: u64,
    #[command(flatten)]
    pub common: Common,
}
