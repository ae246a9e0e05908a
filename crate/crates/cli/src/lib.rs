//! Command-line front end: simulation summaries, CF grids, exact moment
//! tables and comparison reports, each with a reproducibility manifest.

mod args;
mod cf;
mod compare;
mod grid;
mod moments;
mod output;
mod replay;
mod simulate;

pub use args::{CfArgs, CfMode, Cli, Command, CompareArgs, Format, MomentsArgs, Observe, SimulateArgs};
pub use compare::{CfGap, CompareReport, DensityOverlay, KsVerdict, MomentComparison};
pub use grid::GridSpec;
pub use output::{OutputRecord, RunManifest, OUT_DIR_ENV};
pub use simulate::{SimulationMeta, SimulationReport};

/// How a successful invocation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Outputs were written but a built-in verdict failed.
    VerdictFailed,
}

pub const SCHEMA_VERSION: u32 = 1;

/// Runs one parsed invocation. `argv` (without the program name) is
/// recorded in the manifest so the run can be replayed.
pub fn run(cli: Cli, argv: Vec<String>) -> anyhow::Result<Outcome> {
    if let Some(threads) = cli.threads {
        // Only the first call in a process can size the global pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match cli.command {
        Command::Simulate(a) => simulate::run(a, argv),
        Command::Moments(a) => moments::run(a, argv),
        Command::Cf(a) => cf::run(a, argv),
        Command::Compare(a) => compare::run(a, argv),
        Command::Replay(a) => replay::run(a),
    }
}
