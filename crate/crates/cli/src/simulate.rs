use std::fs::File;
use std::io::BufWriter;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use turnover::empirical::{EmpiricalSummary, SummaryBuilder, SummaryOptions};
use turnover::rng::replica_stream;
use turnover::simulator::{distance_row, CsvLayout, CsvWriter, InitLaw, SimConfig, Simulation};
use turnover::{OffsetDistribution, OffsetKind};

use crate::args::{Layout, Observe, SimulateArgs};
use crate::output::{create_parent, resolve, to_json, Session};
use crate::{Outcome, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationMeta {
    pub particles: usize,
    pub sigma: f64,
    pub offset: OffsetKind,
    pub observe: Observe,
    pub steps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seed: u64,
    pub init: InitLaw,
    pub replicas: u64,
    pub frames_per_replica: u64,
}

/// `simulate` output: run metadata plus the empirical summary fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub schema_version: u32,
    pub meta: SimulationMeta,
    #[serde(flatten)]
    pub summary: EmpiricalSummary,
}

impl Observe {
    fn extract(self, sim: &Simulation) -> Vec<f64> {
        match self {
            Observe::Raw => sim.state().positions.clone(),
            Observe::Positions => sim.view().positions,
            Observe::Distances => distance_row(&sim.view()).values,
        }
    }
}

pub fn config_from(args: &SimulateArgs) -> Result<SimConfig> {
    let offset = OffsetDistribution::new(args.offset, args.sigma)?;
    let mut config = SimConfig::new(args.particles, offset)
        .steps(args.steps)
        .seed(args.seed)
        .init(args.init);
    if let Some(b) = args.burn_in {
        config = config.burn_in(b);
    }
    if let Some(t) = args.thin {
        config = config.thin(t);
    }
    config.validate()?;
    Ok(config)
}

fn options_from(args: &SimulateArgs) -> SummaryOptions {
    let mut options = SummaryOptions::new(args.sigma);
    options.max_order = args.max_moment;
    options.kde_bandwidth = args.bandwidth.unwrap_or(args.sigma / 10.0);
    options.ecf_points = args.ecf_points.clone();
    options
}

fn run_replica(
    config: &SimConfig,
    replica: u64,
    observe: Observe,
    options: SummaryOptions,
    mut trajectory: Option<&mut CsvWriter<BufWriter<File>>>,
) -> Result<SummaryBuilder> {
    let mut builder = SummaryBuilder::new(options)?;
    let mut sim = Simulation::with_rng(config.clone(), replica_stream(config.seed, replica))?;
    let mut io_error = None;
    sim.run_with(|s| {
        let frame = observe.extract(s);
        if let Some(w) = trajectory.as_deref_mut() {
            if let Err(e) = w.frame(s.state().time, &frame) {
                io_error.get_or_insert(e);
            }
        }
        builder.push_frame(&frame);
    });
    if let Some(e) = io_error {
        return Err(e).context("writing trajectory");
    }
    Ok(builder)
}

/// Runs all replicas and merges them in replica order.
pub fn simulate(args: &SimulateArgs, session: Option<&mut Session>) -> Result<SimulationReport> {
    let config = config_from(args)?;
    if args.replicas == 0 {
        bail!("invalid argument: replicas must be at least 1");
    }
    if args.max_moment == 0 {
        bail!("invalid argument: max-moment must be at least 1");
    }
    let options = options_from(args);
    let mut builders = if let Some(path) = &args.trajectory {
        if args.replicas > 1 {
            bail!("invalid argument: --trajectory records a single chain; drop --replicas");
        }
        let path = resolve(path);
        create_parent(&path)?;
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let width = match args.observe {
            Observe::Distances => args.particles - 1,
            _ => args.particles,
        };
        let layout = match args.layout {
            Layout::Long => CsvLayout::Long,
            Layout::Wide => CsvLayout::Wide,
        };
        let mut writer = CsvWriter::new(BufWriter::new(file), width, layout)?;
        let builder = run_replica(&config, 0, args.observe, options, Some(&mut writer))?;
        writer.into_inner().into_inner().map_err(|e| e.into_error())?;
        if let Some(s) = session {
            s.record_file(path)?;
        }
        vec![builder]
    } else {
        (0..args.replicas)
            .into_par_iter()
            .map(|r| run_replica(&config, r, args.observe, options.clone(), None))
            .collect::<Result<Vec<_>>>()?
    };
    let mut merged = builders.remove(0);
    for b in builders {
        merged.merge(b)?;
    }
    let summary = merged.finish()?;
    Ok(SimulationReport {
        schema_version: SCHEMA_VERSION,
        meta: SimulationMeta {
            particles: config.n_particles,
            sigma: args.sigma,
            offset: args.offset,
            observe: args.observe,
            steps: config.steps,
            burn_in: config.burn_in,
            thin: config.thin,
            seed: config.seed,
            init: config.init,
            replicas: args.replicas,
            frames_per_replica: config.frame_count(),
        },
        summary,
    })
}

pub fn run(args: SimulateArgs, argv: Vec<String>) -> Result<Outcome> {
    let mut session = Session::new("simulate", argv, &args, Some(args.seed))?;
    let report = simulate(&args, Some(&mut session))?;
    session.emit(args.out.as_deref(), &to_json(&report)?)?;
    session.finish(args.out.as_deref())?;
    Ok(Outcome::Success)
}
