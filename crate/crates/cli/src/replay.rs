use std::fs;

use anyhow::{Context, Result};
use clap::Parser;

use crate::args::{Cli, ReplayArgs};
use crate::output::{sha256_hex, RunManifest};
use crate::Outcome;

/// Re-runs the recorded arguments and compares every output digest.
pub fn run(args: ReplayArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&args.manifest)
        .with_context(|| format!("reading {}", args.manifest.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .with_context(|| format!("parsing manifest {}", args.manifest.display()))?;
    let argv = std::iter::once("turnover".to_string()).chain(manifest.args.iter().cloned());
    let cli = Cli::try_parse_from(argv).context("manifest arguments no longer parse")?;
    crate::run(cli, manifest.args.clone())?;
    let mut identical = true;
    for record in &manifest.outputs {
        let bytes = fs::read(&record.path).with_context(|| format!("reading {}", record.path.display()))?;
        let digest = sha256_hex(&bytes);
        let same = digest == record.sha256;
        identical &= same;
        println!(
            "{} {}",
            if same { "identical" } else { "differs  " },
            record.path.display()
        );
    }
    Ok(if identical {
        Outcome::Success
    } else {
        Outcome::VerdictFailed
    })
}
