use std::fmt::Write as _;

use anyhow::{bail, Result};
use serde::Serialize;
use turnover::moments::{build_phi_table, check_order_guard, moment_table, satisfies_bound, MomentTable, PhiTable};

use crate::args::{Format, MomentsArgs};
use crate::output::{to_json, Session};
use crate::{Outcome, SCHEMA_VERSION};

#[derive(Debug, Serialize)]
struct PhiRow {
    partition: String,
    order: u32,
    num: String,
    den: String,
    value: f64,
}

#[derive(Debug, Serialize)]
struct PhiExport {
    schema_version: u32,
    sigma: f64,
    bound_holds: bool,
    entries: Vec<PhiRow>,
}

fn phi_rows(table: &PhiTable, sigma: f64) -> Vec<PhiRow> {
    table
        .iter()
        .map(|(p, c)| PhiRow {
            partition: p.to_string(),
            order: p.order(),
            num: c.numerator().to_string(),
            den: c.denominator().to_string(),
            value: c.value_at(sigma),
        })
        .collect()
}

pub fn moments_csv(table: &MomentTable) -> String {
    let mut s = String::from("order,num,den,approx\n");
    for r in &table.rows {
        let _ = writeln!(s, "{},{},{},{:?}", r.order, r.num, r.den, r.value);
    }
    s
}

fn phi_csv(rows: &[PhiRow]) -> String {
    let mut s = String::from("partition,order,num,den,approx\n");
    for r in rows {
        let _ = writeln!(s, "\"{}\",{},{},{},{:?}", r.partition, r.order, r.num, r.den, r.value);
    }
    s
}

pub fn run(args: MomentsArgs, argv: Vec<String>) -> Result<Outcome> {
    if args.max_order < 2 {
        bail!("invalid argument: --max-order must be at least 2, got {}", args.max_order);
    }
    if !(args.sigma > 0.0 && args.sigma.is_finite()) {
        bail!("invalid argument: --sigma must be positive, got {}", args.sigma);
    }
    check_order_guard(args.max_order, args.order_guard)?;
    let mut session = Session::new("moments", argv, &args, None)?;
    let table = build_phi_table(args.max_order)?;
    let bound_holds = table.iter().all(|(p, c)| satisfies_bound(p, c));
    let bytes = if args.phi {
        let entries = phi_rows(&table, args.sigma);
        match args.format {
            Format::Csv => phi_csv(&entries).into_bytes(),
            Format::Json => to_json(&PhiExport {
                schema_version: SCHEMA_VERSION,
                sigma: args.sigma,
                bound_holds,
                entries,
            })?,
        }
    } else {
        let moments = moment_table(&table, args.sigma)?;
        match args.format {
            Format::Csv => moments_csv(&moments).into_bytes(),
            Format::Json => to_json(&moments)?,
        }
    };
    session.emit(args.out.as_deref(), &bytes)?;
    session.finish(args.out.as_deref())?;
    if !bound_holds {
        eprintln!("verdict failed: a Φ entry exceeds its factorial bound");
        return Ok(Outcome::VerdictFailed);
    }
    Ok(Outcome::Success)
}
