//! The turnover chain, its renormalised view and the inter-particle
//! distance process.
//!
//! One step picks an ordered pair `(i, j)` of distinct particles uniformly
//! among the `N(N-1)` possibilities and moves particle `i` to `X_j + Δ`.
//! Indices are zero-based throughout the API.

use std::io::{self, Write};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::offsets::OffsetDistribution;
use crate::rng::{stream, RandomStream};

/// Law of the i.i.d. initial positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "sd", rename_all = "snake_case")]
pub enum InitLaw {
    AllZero,
    /// Centred normal with the given standard deviation.
    IidGaussian(f64),
    /// Centred uniform with the given standard deviation.
    IidUniform(f64),
}

impl FromStr for InitLaw {
    type Err = Error;

    /// Accepts `zero`, `gaussian:<sd>` or `uniform:<sd>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let sd = |a: Option<&str>| -> Result<f64> {
            let v: f64 = a
                .ok_or_else(|| invalid(format!("init law `{name}` needs a standard deviation")))?
                .parse()
                .map_err(|_| invalid(format!("bad init standard deviation in `{s}`")))?;
            if v >= 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(invalid("init standard deviation must be nonnegative"))
            }
        };
        match name {
            "zero" | "all-zero" => Ok(InitLaw::AllZero),
            "gaussian" => Ok(InitLaw::IidGaussian(sd(arg)?)),
            "uniform" => Ok(InitLaw::IidUniform(sd(arg)?)),
            other => Err(invalid(format!("unknown init law `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_particles: usize,
    pub offset: OffsetDistribution,
    /// Steps after burn-in.
    pub steps: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// Record every `thin`-th step.
    pub thin: u64,
    pub init: InitLaw,
}

impl SimConfig {
    /// Defaults: no steps, burn-in `100·N`, thinning `N`, all particles at zero.
    pub fn new(n_particles: usize, offset: OffsetDistribution) -> Self {
        Self {
            n_particles,
            offset,
            steps: 0,
            burn_in: 100 * n_particles as u64,
            seed: 0,
            thin: n_particles.max(1) as u64,
            init: InitLaw::AllZero,
        }
    }

    pub fn steps(mut self, steps: u64) -> Self {
        self.steps = steps;
        self
    }

    pub fn burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn thin(mut self, thin: u64) -> Self {
        self.thin = thin;
        self
    }

    pub fn init(mut self, init: InitLaw) -> Self {
        self.init = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(invalid(format!(
                "need at least 2 particles, got {}",
                self.n_particles
            )));
        }
        if self.thin == 0 {
            return Err(invalid("thin must be at least 1"));
        }
        Ok(())
    }

    /// Number of frames [`run`] records.
    pub fn frame_count(&self) -> u64 {
        1 + self.steps / self.thin.max(1)
    }
}

/// Raw positions `X_1..X_N` at time `time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleState {
    pub time: u64,
    pub positions: Vec<f64>,
}

impl EnsembleState {
    pub fn new(positions: Vec<f64>) -> Self {
        Self { time: 0, positions }
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn initial<R: Rng + ?Sized>(n: usize, init: InitLaw, rng: &mut R) -> Self {
        let positions = match init {
            InitLaw::AllZero => vec![0.0; n],
            InitLaw::IidGaussian(sd) => (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    sd * z
                })
                .collect(),
            InitLaw::IidUniform(sd) => {
                let h = 3f64.sqrt() * sd;
                (0..n).map(|_| if h > 0.0 { rng.random_range(-h..=h) } else { 0.0 }).collect()
            }
        };
        Self::new(positions)
    }
}

/// One update: particle `target` jumped to `positions[source] + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub target: usize,
    pub source: usize,
    pub offset: f64,
}

/// Draws an ordered pair of distinct indices uniformly from `0..n`.
///
/// `i` is uniform on `0..n` and `j` uniform on the remaining `n-1` indices,
/// shifted past `i`, so there is no rejection loop.
pub fn sample_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    debug_assert!(n >= 2);
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Draws the next jump: pair first, then offset.
pub fn sample_jump<R: Rng + ?Sized>(n: usize, dist: &OffsetDistribution, rng: &mut R) -> Jump {
    let (target, source) = sample_pair(n, rng);
    Jump {
        target,
        source,
        offset: dist.sample(rng),
    }
}

impl EnsembleState {
    pub fn apply(&mut self, jump: Jump) {
        self.positions[jump.target] = self.positions[jump.source] + jump.offset;
        self.time += 1;
    }
}

/// Advances `state` by one step and returns the jump taken.
pub fn step<R: Rng + ?Sized>(
    state: &mut EnsembleState,
    dist: &OffsetDistribution,
    rng: &mut R,
) -> Jump {
    let jump = sample_jump(state.n(), dist, rng);
    state.apply(jump);
    jump
}

/// Centred positions scaled by `1/√N`; they sum to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormalisedView {
    pub positions: Vec<f64>,
}

pub fn renormalise(state: &EnsembleState) -> RenormalisedView {
    let n = state.n() as f64;
    let mean = state.positions.iter().sum::<f64>() / n;
    renormalise_about(state, mean)
}

fn renormalise_about(state: &EnsembleState, mean: f64) -> RenormalisedView {
    let scale = 1.0 / (state.n() as f64).sqrt();
    RenormalisedView {
        positions: state.positions.iter().map(|x| (x - mean) * scale).collect(),
    }
}

impl RenormalisedView {
    /// Absolute tolerance within which the entries must sum to zero.
    pub fn zero_sum_tolerance(&self) -> f64 {
        let max = self.positions.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        1e-12 * self.positions.len() as f64 * max.max(f64::MIN_POSITIVE)
    }
}

/// `D_{1,j} = X̄_1 - X̄_j` for `j = 2..N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub values: Vec<f64>,
}

pub fn distance_row(view: &RenormalisedView) -> DistanceRow {
    let first = view.positions[0];
    DistanceRow {
        values: view.positions[1..].iter().map(|x| first - x).collect(),
    }
}

/// Recovers `X̄_1` from the distances; uses `Σ X̄ = 0`.
pub fn reconstruct_first(row: &DistanceRow) -> f64 {
    let n = row.values.len() + 1;
    row.values.iter().sum::<f64>() / n as f64
}

impl DistanceRow {
    /// `D_{1,l}` for a zero-based particle index `l`; `D_{1,1} = 0`.
    fn from_first(&self, l: usize) -> f64 {
        if l == 0 {
            0.0
        } else {
            self.values[l - 1]
        }
    }

    /// `D_{j,l} = D_{1,l} - D_{1,j}`.
    fn between(&self, j: usize, l: usize) -> f64 {
        self.from_first(l) - self.from_first(j)
    }

    /// Evolves the row through one jump directly, without positions.
    pub fn apply(&mut self, jump: Jump) {
        let n = self.values.len() + 1;
        let shift = jump.offset / (n as f64).sqrt();
        let Jump { target, source, .. } = jump;
        if target == 0 {
            // Particle 1 moved next to `source`: D_{1l} <- D_{source,l} + Δ/√N.
            let old = self.clone();
            for l in 1..n {
                self.values[l - 1] = if l == source {
                    shift
                } else {
                    old.between(source, l) + shift
                };
            }
        } else {
            // Only D_{1,target} changes: D_{1,source} - Δ/√N.
            self.values[target - 1] = self.from_first(source) - shift;
        }
    }
}

/// A chain together with its running position sum.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    state: EnsembleState,
    sum: f64,
    rng: RandomStream,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        Self::with_rng(config.clone(), stream(config.seed))
    }

    pub fn with_rng(config: SimConfig, mut rng: RandomStream) -> Result<Self> {
        config.validate()?;
        let state = EnsembleState::initial(config.n_particles, config.init, &mut rng);
        let sum = state.positions.iter().sum();
        Ok(Self {
            config,
            state,
            sum,
            rng,
        })
    }

    pub fn state(&self) -> &EnsembleState {
        &self.state
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn step(&mut self) -> Jump {
        let jump = sample_jump(self.state.n(), &self.config.offset, &mut self.rng);
        let old = self.state.positions[jump.target];
        self.state.apply(jump);
        self.sum += self.state.positions[jump.target] - old;
        jump
    }

    /// Renormalised view using the running mean.
    pub fn view(&self) -> RenormalisedView {
        renormalise_about(&self.state, self.sum / self.state.n() as f64)
    }

    fn resync(&mut self) {
        self.sum = self.state.positions.iter().sum();
    }

    /// Runs burn-in, then calls `visit` on the first post-burn-in state and
    /// on every `thin`-th state after it.
    pub fn run_with(&mut self, mut visit: impl FnMut(&Self)) {
        for _ in 0..self.config.burn_in {
            self.step();
        }
        self.resync();
        visit(self);
        let thin = self.config.thin;
        for t in 1..=self.config.steps {
            self.step();
            if t % thin == 0 {
                self.resync();
                visit(self);
            }
        }
    }
}

/// Recorded frames of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub frames: Vec<EnsembleState>,
}

impl Trajectory {
    pub fn views(&self) -> impl Iterator<Item = RenormalisedView> + '_ {
        self.frames.iter().map(renormalise)
    }

    pub fn distance_rows(&self) -> impl Iterator<Item = DistanceRow> + '_ {
        self.views().map(|v| distance_row(&v))
    }
}

/// Runs a chain and keeps every recorded frame in memory.
pub fn run(config: &SimConfig) -> Result<Trajectory> {
    let mut sim = Simulation::new(config.clone())?;
    let mut frames = Vec::with_capacity(config.frame_count().min(1 << 20) as usize);
    sim.run_with(|s| frames.push(s.state().clone()));
    Ok(Trajectory { frames })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvLayout {
    /// `step,particle,position`
    Long,
    /// `step,x1,...,xN`
    Wide,
}

/// Streams frames as CSV, one header then one block per frame. Particle
/// numbers in the long layout start at 1.
pub struct CsvWriter<W: Write> {
    out: W,
    layout: CsvLayout,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, n: usize, layout: CsvLayout) -> io::Result<Self> {
        match layout {
            CsvLayout::Long => writeln!(out, "step,particle,position")?,
            CsvLayout::Wide => {
                write!(out, "step")?;
                for k in 1..=n {
                    write!(out, ",x{k}")?;
                }
                writeln!(out)?;
            }
        }
        Ok(Self { out, layout })
    }

    pub fn frame(&mut self, t: u64, xs: &[f64]) -> io::Result<()> {
        let out = &mut self.out;
        match self.layout {
            CsvLayout::Long => {
                for (k, x) in xs.iter().enumerate() {
                    writeln!(out, "{t},{},{x:?}", k + 1)?;
                }
            }
            CsvLayout::Wide => {
                write!(out, "{t}")?;
                for x in xs {
                    write!(out, ",{x:?}")?;
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub fn write_csv<'a, W: Write>(
    out: &mut W,
    frames: impl IntoIterator<Item = (u64, &'a [f64])>,
    n: usize,
    layout: CsvLayout,
) -> io::Result<()> {
    let mut w = CsvWriter::new(out, n, layout)?;
    for (t, xs) in frames {
        w.frame(t, xs)?;
    }
    Ok(())
}
