use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use turnover::charfn::{laplace_pdf, mu_n_pdf_series, phi_n_diag, psi_n};
use turnover::moments::{build_phi_table, moment};
use turnover::{OffsetDistribution, OffsetKind};

use crate::args::{CompareArgs, Observe};
use crate::output::{to_json, Session};
use crate::simulate::SimulationReport;
use crate::{Outcome, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentComparison {
    pub order: u32,
    pub empirical: f64,
    pub exact: f64,
    pub se: Option<f64>,
    /// `|empirical - exact| / |exact|`; absent when `exact` is zero.
    pub relative_gap: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfGap {
    pub s: f64,
    pub empirical: f64,
    pub analytic: f64,
    pub gap: f64,
    pub se: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsVerdict {
    pub stat: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOverlay {
    pub grid: Vec<f64>,
    pub kde: Vec<f64>,
    pub laplace_pdf: Option<Vec<f64>>,
    pub mu_n_pdf: Option<Vec<f64>>,
    pub reference_kde: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema_version: u32,
    /// `exact`, or the path of the reference summary.
    pub reference: String,
    pub particles: usize,
    pub sigma: f64,
    pub observe: Observe,
    pub moments: Vec<MomentComparison>,
    pub cf_gaps: Vec<CfGap>,
    pub ks: Option<KsVerdict>,
    pub density: DensityOverlay,
    pub pass: bool,
}

/// Relative tolerance for the even empirical moments.
pub fn moment_tolerance(order: u32) -> Option<f64> {
    match order {
        2 => Some(0.05),
        4 => Some(0.10),
        6 => Some(0.25),
        _ => None,
    }
}

fn load(path: &Path) -> Result<SimulationReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing summary {}", path.display()))
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn check_inputs(args: &CompareArgs, report: &SimulationReport) -> Result<()> {
    let meta = &report.meta;
    if let Some(sigma) = args.sigma {
        if !same(sigma, meta.sigma) {
            bail!("validation error: --sigma {sigma} does not match the summary's σ = {}", meta.sigma);
        }
    }
    if let Some(n) = args.particles {
        if n != meta.particles {
            bail!("validation error: --particles {n} does not match the summary's N = {}", meta.particles);
        }
    }
    if (args.max_order as usize) > report.summary.moments.len() {
        bail!(
            "invalid argument: --max-order {} exceeds the {} moments in the summary",
            args.max_order,
            report.summary.moments.len()
        );
    }
    Ok(())
}

/// Exact moments of the law the observed samples approach.
fn exact_moments(observe: Observe, sigma: f64, max_order: u32) -> Result<Vec<f64>> {
    match observe {
        Observe::Positions => {
            let table = build_phi_table(max_order)?;
            (1..=max_order)
                .map(|k| Ok(moment(k, &table)?.value_at(sigma)))
                .collect()
        }
        Observe::Distances => {
            // Laplace(b): M_2m = (2m)! b^2m.
            let b = sigma / 2f64.sqrt();
            Ok((1..=max_order)
                .map(|k| {
                    if k % 2 == 1 {
                        0.0
                    } else {
                        (1..=k).map(f64::from).product::<f64>() * b.powi(k as i32)
                    }
                })
                .collect())
        }
        Observe::Raw => bail!("invalid argument: raw positions have no stationary law; use --reference"),
    }
}

fn combine_se(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a?.hypot(b?))
}

fn moment_rows(
    report: &SimulationReport,
    exact: &[f64],
    exact_se: &[Option<f64>],
    multiplier: f64,
) -> Vec<MomentComparison> {
    exact
        .iter()
        .enumerate()
        .map(|(i, &exact)| {
            let order = i as u32 + 1;
            let empirical = report.summary.moments[i];
            let se = match exact_se.get(i) {
                Some(other) => combine_se(report.summary.moment_se[i], *other),
                None => report.summary.moment_se[i],
            };
            let relative_gap = (exact != 0.0).then(|| (empirical - exact).abs() / exact.abs());
            let tolerance = if order % 2 == 0 { moment_tolerance(order) } else { None };
            let pass = if order % 2 == 1 {
                se.map(|se| (empirical - exact).abs() <= multiplier * se)
            } else {
                tolerance.zip(relative_gap).map(|(t, g)| g <= t)
            };
            MomentComparison {
                order,
                empirical,
                exact,
                se,
                relative_gap,
                tolerance,
                pass,
            }
        })
        .collect()
}

pub fn compare(args: &CompareArgs) -> Result<CompareReport> {
    let report = load(&args.summary)?;
    check_inputs(args, &report)?;
    let meta = &report.meta;
    let summary = &report.summary;
    let dist = OffsetDistribution::new(meta.offset, meta.sigma)?;
    let multiplier = args.se_multiplier;
    let band = |gap: f64, se: Option<f64>| se.map(|se| gap.abs() <= multiplier * se);

    let (label, moments, cf_gaps, ks, density) = if let Some(path) = &args.reference {
        let other = load(path)?;
        let om = &other.meta;
        if !same(om.sigma, meta.sigma) || om.particles != meta.particles || om.observe != meta.observe {
            bail!(
                "validation error: reference has N = {}, σ = {}, observe = {:?} but the summary has N = {}, σ = {}, observe = {:?}",
                om.particles, om.sigma, om.observe, meta.particles, meta.sigma, meta.observe
            );
        }
        check_inputs(args, &other)?;
        let k = args.max_order as usize;
        let moments = moment_rows(&report, &other.summary.moments[..k], &other.summary.moment_se[..k], multiplier);
        let cf_gaps = summary
            .ecf
            .iter()
            .filter_map(|p| {
                let q = other.summary.ecf.iter().find(|q| q.s == p.s)?;
                let se = combine_se(p.se, q.se);
                let gap = p.re - q.re;
                Some(CfGap {
                    s: p.s,
                    empirical: p.re,
                    analytic: q.re,
                    gap,
                    se,
                    pass: band(gap, se),
                })
            })
            .collect();
        let reference_kde = (other.summary.kde.grid == summary.kde.grid).then(|| other.summary.kde.values.clone());
        let density = DensityOverlay {
            grid: summary.kde.grid.clone(),
            kde: summary.kde.values.clone(),
            laplace_pdf: None,
            mu_n_pdf: None,
            reference_kde,
        };
        (path.display().to_string(), moments, cf_gaps, None, density)
    } else {
        let exact = exact_moments(meta.observe, meta.sigma, args.max_order)?;
        let moments = moment_rows(&report, &exact, &[], multiplier);
        let analytic = |s: f64| -> Result<Option<f64>> {
            Ok(match meta.observe {
                Observe::Distances => Some(psi_n(s, meta.particles, &dist)?),
                Observe::Positions if meta.particles <= args.cap => {
                    Some(phi_n_diag(s, meta.particles, &dist, args.cap)?)
                }
                _ => None,
            })
        };
        let mut cf_gaps = Vec::new();
        for p in &summary.ecf {
            if let Some(a) = analytic(p.s)? {
                let gap = p.re - a;
                cf_gaps.push(CfGap {
                    s: p.s,
                    empirical: p.re,
                    analytic: a,
                    gap,
                    se: p.se,
                    pass: band(gap, p.se),
                });
            }
        }
        let distances = meta.observe == Observe::Distances;
        let ks = distances.then(|| KsVerdict {
            stat: summary.ks_laplace,
            threshold: args.ks_threshold,
            pass: summary.ks_laplace < args.ks_threshold,
        });
        let grid = summary.kde.grid.clone();
        let laplace = distances.then(|| grid.iter().map(|&y| laplace_pdf(y, meta.sigma)).collect());
        let mu_n_pdf = if distances && meta.offset == OffsetKind::Gaussian && meta.particles > 2 {
            Some(
                grid.iter()
                    .map(|&y| mu_n_pdf_series(y, meta.particles, meta.sigma, 1e-12))
                    .collect::<turnover::Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        let density = DensityOverlay {
            kde: summary.kde.values.clone(),
            grid,
            laplace_pdf: laplace,
            mu_n_pdf,
            reference_kde: None,
        };
        ("exact".to_string(), moments, cf_gaps, ks, density)
    };

    let pass = moments.iter().all(|m| m.pass != Some(false))
        && cf_gaps.iter().all(|g| g.pass != Some(false))
        && ks.as_ref().is_none_or(|k| k.pass);
    Ok(CompareReport {
        schema_version: SCHEMA_VERSION,
        reference: label,
        particles: meta.particles,
        sigma: meta.sigma,
        observe: meta.observe,
        moments,
        cf_gaps,
        ks,
        density,
        pass,
    })
}

pub fn run(args: CompareArgs, argv: Vec<String>) -> Result<Outcome> {
    let mut session = Session::new("compare", argv, &args, None)?;
    let report = compare(&args)?;
    session.emit(args.out.as_deref(), &to_json(&report)?)?;
    session.finish(args.out.as_deref())?;
    if report.pass {
        Ok(Outcome::Success)
    } else {
        eprintln!("verdict failed: see the pass fields of the report");
        Ok(Outcome::VerdictFailed)
    }
}
