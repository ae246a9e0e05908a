//! Browser bindings. Each export takes plain numbers and returns a JSON
//! string that `www/index.html` parses and plots.

use serde::Serialize;
use turnover::charfn::{laplace_pdf, psi_inf1, psi_n};
use turnover::empirical::{linspace, SummaryBuilder, SummaryOptions};
use turnover::moments::{build_phi_table, check_order_guard, moment_table, MomentTable, DEFAULT_ORDER_GUARD};
use turnover::simulator::{distance_row, SimConfig, Simulation};
use turnover::{OffsetDistribution, OffsetKind, Result};
use wasm_bindgen::prelude::*;

/// Keeps a single call under a few seconds in the browser.
pub const MAX_STEPS: u64 = 20_000_000;
pub const MAX_PARTICLES: usize = 1000;

#[derive(Debug, Serialize)]
pub struct DensityPlot {
    pub grid: Vec<f64>,
    pub kde: Vec<f64>,
    pub laplace: Vec<f64>,
    pub bin_centres: Vec<f64>,
    pub bin_density: Vec<f64>,
    pub ks_laplace: f64,
    pub variance: f64,
    pub variance_exact: f64,
    pub samples: u64,
}

#[derive(Debug, Serialize)]
pub struct CfPlot {
    pub s: Vec<f64>,
    pub psi_n: Vec<f64>,
    pub laplace: Vec<f64>,
}

fn offset(kind: &str, sigma: f64) -> Result<OffsetDistribution> {
    OffsetDistribution::new(kind.parse::<OffsetKind>()?, sigma)
}

fn invalid(msg: String) -> turnover::Error {
    turnover::Error::InvalidArgument(msg)
}

/// Runs the chain and summarises the distances from particle 1.
pub fn distance_density(particles: usize, sigma: f64, kind: &str, steps: u64, seed: u64) -> Result<DensityPlot> {
    if particles > MAX_PARTICLES || steps > MAX_STEPS {
        return Err(invalid(format!(
            "demo limits are {MAX_PARTICLES} particles and {MAX_STEPS} steps"
        )));
    }
    let dist = offset(kind, sigma)?;
    let n2 = (particles * particles) as u64;
    let config = SimConfig::new(particles, dist)
        .steps(steps)
        .burn_in(100 * n2)
        .thin((particles as u64 / 10).max(1))
        .seed(seed);
    let mut options = SummaryOptions::new(sigma);
    options.max_order = 2;
    options.kde_bandwidth = sigma / 10.0;
    options.kde_grid = linspace(-5.0 * sigma, 5.0 * sigma, 201);
    options.kde_max_samples = 50_000;
    let mut builder = SummaryBuilder::new(options)?;
    Simulation::new(config)?.run_with(|s| builder.push_frame(&distance_row(&s.view()).values));
    let summary = builder.finish()?;

    let hist = &summary.histogram;
    let total = hist.total().max(1) as f64;
    let (bin_centres, bin_density) = hist
        .edges
        .windows(2)
        .zip(&hist.counts)
        .map(|(e, &c)| ((e[0] + e[1]) / 2.0, c as f64 / (total * (e[1] - e[0]))))
        .unzip();
    let n = particles as f64;
    Ok(DensityPlot {
        laplace: summary.kde.grid.iter().map(|&y| laplace_pdf(y, sigma)).collect(),
        grid: summary.kde.grid,
        kde: summary.kde.values,
        bin_centres,
        bin_density,
        ks_laplace: summary.ks_laplace,
        variance: summary.moments[1],
        variance_exact: (n - 1.0) * sigma * sigma / n,
        samples: summary.sample_count,
    })
}

/// `ψ_N` and its Laplace limit on `count` points of `[0, s_max]`.
pub fn cf_curves(particles: usize, sigma: f64, kind: &str, s_max: f64, count: usize) -> Result<CfPlot> {
    if !(s_max > 0.0) || !(2..=5000).contains(&count) {
        return Err(invalid("need s_max > 0 and 2..=5000 points".into()));
    }
    let dist = offset(kind, sigma)?;
    let s = linspace(0.0, s_max, count);
    let psi = s.iter().map(|&x| psi_n(x, particles, &dist)).collect::<Result<_>>()?;
    Ok(CfPlot {
        laplace: s.iter().map(|&x| psi_inf1(x, sigma)).collect(),
        psi_n: psi,
        s,
    })
}

/// Exact moments of the limiting single-particle law.
pub fn moments(max_order: u32, sigma: f64) -> Result<MomentTable> {
    if max_order < 2 || !(sigma > 0.0) {
        return Err(invalid("need max_order >= 2 and sigma > 0".into()));
    }
    check_order_guard(max_order, DEFAULT_ORDER_GUARD.min(24))?;
    moment_table(&build_phi_table(max_order)?, sigma)
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, String> {
    r.map_err(|e| e.to_string())
        .and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
}

#[wasm_bindgen]
pub fn simulate(particles: usize, sigma: f64, offset: &str, steps: f64, seed: f64) -> std::result::Result<String, String> {
    to_js(distance_density(particles, sigma, offset, steps as u64, seed as u64))
}

#[wasm_bindgen(js_name = cfCurves)]
pub fn cf_curves_js(particles: usize, sigma: f64, offset: &str, s_max: f64, count: usize) -> std::result::Result<String, String> {
    to_js(cf_curves(particles, sigma, offset, s_max, count))
}

#[wasm_bindgen(js_name = momentTable)]
pub fn moment_table_js(max_order: u32, sigma: f64) -> std::result::Result<String, String> {
    to_js(moments(max_order, sigma))
}
