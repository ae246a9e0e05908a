use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use turnover::simulator::InitLaw;
use turnover::OffsetKind;

use crate::grid::GridSpec;

#[derive(Debug, Parser)]
#[command(name = "turnover", version, about = "Branching-turnover particle system toolkit")]
pub struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the chain and summarise positions or distances.
    Simulate(SimulateArgs),
    /// Exact moments of the limiting single-particle law.
    Moments(MomentsArgs),
    /// Evaluate a characteristic function or density on a grid.
    Cf(CfArgs),
    /// Compare a simulation summary with exact values or another summary.
    Compare(CompareArgs),
    /// Re-run a manifest and check the output digests.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observe {
    /// Renormalised positions.
    Positions,
    /// Distances from particle 1 to every other particle.
    Distances,
    /// Raw positions.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Long,
    Wide,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub particles: usize,
    /// Offset standard deviation.
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value = "gaussian")]
    pub offset: OffsetKind,
    /// Steps after burn-in.
    #[arg(long, default_value_t = 100_000)]
    pub steps: u64,
    /// Defaults to 100·N.
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record every thin-th step; defaults to N.
    #[arg(long)]
    pub thin: Option<u64>,
    /// zero, gaussian:<sd> or uniform:<sd>.
    #[arg(long, default_value = "zero")]
    pub init: InitLaw,
    #[arg(long, value_enum, default_value_t = Observe::Distances)]
    pub observe: Observe,
    /// Independent chains with the same seed and distinct streams.
    #[arg(long, default_value_t = 1)]
    pub replicas: u64,
    /// Highest empirical moment.
    #[arg(long, default_value_t = 8)]
    pub max_moment: usize,
    /// KDE bandwidth; defaults to σ/10.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Points of the empirical CF, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,40")]
    pub ecf_points: Vec<f64>,
    /// Summary JSON; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV file receiving every recorded frame of the observed values.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Layout::Long)]
    pub layout: Layout,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MomentsArgs {
    #[arg(long, default_value_t = 30)]
    pub max_order: u32,
    /// σ used for the floating-point column.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Largest order accepted without complaint.
    #[arg(long, default_value_t = turnover::moments::DEFAULT_ORDER_GUARD)]
    pub order_guard: u32,
    /// Emit every Φ entry instead of the moments.
    #[arg(long)]
    pub phi: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum CfMode {
    #[value(name = "psiN")]
    #[serde(rename = "psiN")]
    PsiN,
    #[value(name = "psiNk")]
    #[serde(rename = "psiNk")]
    PsiNk,
    #[value(name = "psiInfK")]
    #[serde(rename = "psiInfK")]
    PsiInfK,
    #[value(name = "phiN")]
    #[serde(rename = "phiN")]
    PhiN,
    #[value(name = "gammaN")]
    #[serde(rename = "gammaN")]
    GammaN,
    #[value(name = "laplaceCF")]
    #[serde(rename = "laplaceCF")]
    LaplaceCf,
    #[value(name = "laplacePdf")]
    #[serde(rename = "laplacePdf")]
    LaplacePdf,
    #[value(name = "muNpdf")]
    #[serde(rename = "muNpdf")]
    MuNPdf,
    /// Closed-form φ_3.
    #[value(name = "phi3Closed")]
    #[serde(rename = "phi3Closed")]
    Phi3Closed,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CfArgs {
    #[arg(long, value_enum)]
    pub mode: CfMode,
    /// Number of particles.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of distances in the joint CF.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value = "gaussian")]
    pub offset: OffsetKind,
    /// a:b:count with both endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: GridSpec,
    /// Direction of the joint CF: the arguments are s·direction. Defaults to all ones.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub direction: Option<Vec<f64>>,
    /// Largest N (or k + 1) accepted by the recursive modes.
    #[arg(long, default_value_t = turnover::charfn::DEFAULT_DIAG_CAP)]
    pub cap: usize,
    /// Mass dropped by the mixture series.
    #[arg(long, default_value_t = 1e-12)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    /// Summary written by `simulate`.
    pub summary: PathBuf,
    /// Compare against another summary instead of exact values.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Expected σ; a mismatch with the summary is an error.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Expected N; a mismatch with the summary is an error.
    #[arg(long)]
    pub particles: Option<usize>,
    #[arg(long, default_value_t = 6)]
    pub max_order: u32,
    #[arg(long, default_value_t = 0.02)]
    pub ks_threshold: f64,
    /// Width of the confidence bands, in standard errors.
    #[arg(long, default_value_t = 4.0)]
    pub se_multiplier: f64,
    #[arg(long, default_value_t = turnover::charfn::DEFAULT_DIAG_CAP)]
    pub cap: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
