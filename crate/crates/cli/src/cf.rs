use std::fmt::Write as _;

use anyhow::{anyhow, bail, Result};
use serde::Serialize;
use turnover::charfn::{
    check_cap, closed, evaluate_grid, gamma_n, laplace_pdf, mu_n_pdf_series, phi_n_diag, psi_inf1, psi_inf_k,
    psi_n, psi_n_k, ArgVector, CfGrid,
};
use turnover::{Error, OffsetDistribution, OffsetKind};

use crate::args::{CfArgs, CfMode, Format};
use crate::output::{to_json, Session};
use crate::{Outcome, SCHEMA_VERSION};

#[derive(Debug, Serialize)]
struct CfExport {
    schema_version: u32,
    offset: OffsetKind,
    #[serde(flatten)]
    grid: CfGrid,
}

fn need(value: Option<usize>, flag: &str, mode: CfMode) -> Result<usize> {
    value.ok_or_else(|| anyhow!("invalid argument: mode {mode:?} needs {flag}"))
}

/// Integer directions give lattice arguments, which memoise exactly.
fn arguments(s: f64, direction: &[f64]) -> turnover::Result<ArgVector> {
    let integral = direction
        .iter()
        .all(|d| d.fract() == 0.0 && d.abs() <= (1u64 << 31) as f64);
    if integral {
        ArgVector::lattice(s, direction.iter().map(|d| *d as i64).collect())
    } else {
        ArgVector::new(direction.iter().map(|d| s * d).collect())
    }
}

fn direction(args: &CfArgs, k: usize) -> Result<Vec<f64>> {
    match &args.direction {
        None => Ok(vec![1.0; k]),
        Some(d) if d.len() == k => Ok(d.clone()),
        Some(d) => bail!("invalid argument: --direction has {} entries but k = {k}", d.len()),
    }
}

pub fn evaluate(args: &CfArgs) -> Result<CfGrid> {
    let dist = OffsetDistribution::new(args.offset, args.sigma)?;
    let sigma = args.sigma;
    let points = args.grid.points();
    let mode = args.mode;
    let (n, k, values) = match mode {
        CfMode::PsiN => {
            let n = need(args.n, "--n", mode)?;
            (Some(n), None, evaluate_grid(&points, |s| psi_n(s, n, &dist))?)
        }
        CfMode::PsiNk => {
            let n = need(args.n, "--n", mode)?;
            let k = need(args.k, "--k", mode)?;
            check_cap(k + 1, args.cap)?;
            let dir = direction(args, k)?;
            let v = evaluate_grid(&points, |s| psi_n_k(&arguments(s, &dir)?, n, &dist))?;
            (Some(n), Some(k), v)
        }
        CfMode::PsiInfK => {
            let k = need(args.k, "--k", mode)?;
            check_cap(k + 1, args.cap)?;
            let dir = direction(args, k)?;
            (None, Some(k), evaluate_grid(&points, |s| psi_inf_k(&arguments(s, &dir)?, sigma))?)
        }
        CfMode::PhiN => {
            let n = need(args.n, "--n", mode)?;
            (Some(n), None, evaluate_grid(&points, |s| phi_n_diag(s, n, &dist, args.cap))?)
        }
        CfMode::GammaN => {
            let n = need(args.n, "--n", mode)?;
            (Some(n), None, evaluate_grid(&points, |s| gamma_n(s, n, sigma, args.cap))?)
        }
        CfMode::LaplaceCf => (None, None, evaluate_grid(&points, |s| Ok(psi_inf1(s, sigma)))?),
        CfMode::LaplacePdf => (None, None, evaluate_grid(&points, |y| Ok(laplace_pdf(y, sigma)))?),
        CfMode::MuNPdf => {
            let n = need(args.n, "--n", mode)?;
            if args.offset != OffsetKind::Gaussian {
                return Err(Error::Unsupported(format!(
                    "the mixture density needs Gaussian offsets, not {}",
                    args.offset
                ))
                .into());
            }
            (Some(n), None, evaluate_grid(&points, |y| mu_n_pdf_series(y, n, sigma, args.eps))?)
        }
        CfMode::Phi3Closed => (Some(3), None, evaluate_grid(&points, |s| Ok(closed::phi3(s, &dist)))?),
    };
    let name = serde_json::to_value(mode)?
        .as_str()
        .unwrap_or_default()
        .to_string();
    Ok(CfGrid {
        mode: name,
        n,
        k,
        sigma,
        points: values,
    })
}

pub fn grid_csv(grid: &CfGrid) -> String {
    let mut s = String::from("s,value\n");
    for p in &grid.points {
        let _ = writeln!(s, "{:?},{:?}", p.s, p.value);
    }
    s
}

pub fn run(args: CfArgs, argv: Vec<String>) -> Result<Outcome> {
    let mut session = Session::new("cf", argv, &args, None)?;
    let grid = evaluate(&args)?;
    let bytes = match args.format {
        Format::Csv => grid_csv(&grid).into_bytes(),
        Format::Json => to_json(&CfExport {
            schema_version: SCHEMA_VERSION,
            offset: args.offset,
            grid,
        })?,
    };
    session.emit(args.out.as_deref(), &bytes)?;
    session.finish(args.out.as_deref())?;
    Ok(Outcome::Success)
}
