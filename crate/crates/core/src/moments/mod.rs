//! Exact moments of the limiting single-particle law.
//!
//! `Φ_α` is the mixed partial derivative `∂_α ψ_∞^k` at the origin, indexed
//! by a partition `α` (the limit CFs are symmetric, and zero derivative
//! orders can be dropped). Differentiating the limit recursion at zero
//! gives, with `k = #α`,
//!
//! ```text
//! k(k+1) Φ_α = Σ_{i≠j} Φ_⟨α_{i→j}⟩
//!            - σ²  Σ_{i<j}       α_i α_j         Φ_⟨α - e_i - e_j⟩
//!            - 2σ² Σ_{i: α_i≥2}  α_i(α_i - 1)/2  Φ_⟨α - 2e_i⟩
//! ```
//!
//! Merged indices have fewer parts and therefore come earlier in canonical
//! order at the same total order; the `σ²` terms live two orders down.
//! Walking each order's canonical list from `(n)` towards `(1,...,1)` thus
//! always finds its dependencies already computed. The single-part entries
//! `Φ_(n)` are derivatives of the Laplace CF `2/(2 + σ²s²)`.
//!
//! Every `Φ_α` is a rational multiple of `σ^|α|`; only the rational
//! coefficient is stored. The `j`-th moment is `i^{-j} Φ_(1,...,1)`.

mod partition;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
pub use partition::{merge, partitions_canonical, prune, MultiIndex, Partition};

/// Largest order accepted by default; beyond this runtimes leave desk scale.
pub const DEFAULT_ORDER_GUARD: u32 = 40;

/// Exact value `coefficient · σ^sigma_power`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCoeff {
    coefficient: BigRational,
    sigma_power: u32,
}

impl ExactCoeff {
    pub fn new(coefficient: BigRational, sigma_power: u32) -> Self {
        Self {
            coefficient,
            sigma_power,
        }
    }

    pub fn zero(sigma_power: u32) -> Self {
        Self::new(BigRational::zero(), sigma_power)
    }

    pub fn coefficient(&self) -> &BigRational {
        &self.coefficient
    }

    pub fn numerator(&self) -> &BigInt {
        self.coefficient.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.coefficient.denom()
    }

    pub fn sigma_power(&self) -> u32 {
        self.sigma_power
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.is_zero()
    }

    /// Floating-point value at a concrete `σ`.
    pub fn value_at(&self, sigma: f64) -> f64 {
        self.coefficient.to_f64().unwrap_or(f64::NAN) * sigma.powi(self.sigma_power as i32)
    }
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `Φ_(n) = (-1)^{n/2} n! / 2^{n/2} · σ^n` for even `n`, zero for odd `n`.
pub fn phi_base(n: u32) -> ExactCoeff {
    if n % 2 == 1 {
        return ExactCoeff::zero(n);
    }
    let half = n / 2;
    let magnitude = BigRational::new(factorial(n), BigInt::one() << half);
    let coefficient = if half % 2 == 0 { magnitude } else { -magnitude };
    ExactCoeff::new(coefficient, n)
}

/// One application of the `Φ` recursion to `alpha`, with `σ²` given as an
/// exact value. `lookup` must return every dependency.
fn recursion_value<'a>(
    alpha: &Partition,
    sigma_sq: &BigRational,
    lookup: impl Fn(&Partition) -> Option<&'a BigRational>,
) -> Result<BigRational> {
    let parts = alpha.parts();
    let k = parts.len();
    if k == 0 {
        return Ok(BigRational::one());
    }
    let fetch = |p: &Partition| {
        lookup(p).ok_or_else(|| {
            Error::Internal(format!("Φ{p} needed by Φ{alpha} has not been computed yet"))
        })
    };

    // Group identical dependencies so each costs one rational multiply.
    let mut merged: HashMap<Partition, i64> = HashMap::new();
    let alpha_index = MultiIndex(parts.to_vec());
    for i in 0..k {
        for j in (0..k).filter(|&j| j != i) {
            *merged.entry(prune(&merge(&alpha_index, i, j)?)).or_default() += 1;
        }
    }
    let mut lowered: HashMap<Partition, i64> = HashMap::new();
    for i in 0..k {
        for j in i + 1..k {
            let mut m = parts.to_vec();
            m[i] -= 1;
            m[j] -= 1;
            *lowered.entry(prune(&MultiIndex(m))).or_default() += (parts[i] * parts[j]) as i64;
        }
        if parts[i] >= 2 {
            let mut m = parts.to_vec();
            m[i] -= 2;
            // Binomial α_i(α_i-1)/2 times the weight 2.
            *lowered.entry(prune(&MultiIndex(m))).or_default() +=
                (parts[i] * (parts[i] - 1)) as i64;
        }
    }

    let mut numerator = BigRational::zero();
    for (p, count) in &merged {
        numerator += fetch(p)? * BigRational::from_integer(BigInt::from(*count));
    }
    let mut correction = BigRational::zero();
    for (p, count) in &lowered {
        correction += fetch(p)? * BigRational::from_integer(BigInt::from(*count));
    }
    numerator -= correction * sigma_sq;
    let kk = (k * (k + 1)) as i64;
    Ok(numerator / rational(kk, 1))
}

/// `Φ_α` computed from entries already present in `table`.
pub fn phi_recursion_step(alpha: &Partition, table: &PhiTable) -> Result<ExactCoeff> {
    let value = recursion_value(alpha, &BigRational::one(), |p| {
        table.entries.get(p).map(|c| &c.coefficient)
    })?;
    Ok(ExactCoeff::new(value, alpha.order()))
}

/// `Φ_α` for every partition of every order up to `max_order`.
#[derive(Debug, Clone)]
pub struct PhiTable {
    entries: HashMap<Partition, ExactCoeff>,
    /// Canonical list per order.
    by_order: Vec<Vec<Partition>>,
    max_order: u32,
}

impl PhiTable {
    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn get(&self, alpha: &Partition) -> Option<&ExactCoeff> {
        self.entries.get(alpha)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of one order in canonical order.
    pub fn order(&self, n: u32) -> impl Iterator<Item = (&Partition, &ExactCoeff)> {
        self.by_order
            .get(n as usize)
            .into_iter()
            .flatten()
            .map(move |p| (p, &self.entries[p]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Partition, &ExactCoeff)> {
        (0..=self.max_order).flat_map(move |n| self.order(n))
    }
}

/// Builds the table order by order, walking each canonical list from `(n)`.
pub fn build_phi_table(max_order: u32) -> Result<PhiTable> {
    let mut table = PhiTable {
        entries: HashMap::new(),
        by_order: Vec::with_capacity(max_order as usize + 1),
        max_order,
    };
    for n in 0..=max_order {
        let list = partitions_canonical(n);
        for alpha in &list {
            let coeff = if n % 2 == 1 {
                ExactCoeff::zero(n)
            } else if alpha.len() <= 1 {
                phi_base(n)
            } else {
                phi_recursion_step(alpha, &table)?
            };
            table.entries.insert(alpha.clone(), coeff);
        }
        table.by_order.push(list);
    }
    Ok(table)
}

/// Same recursion with `σ²` fixed to an exact value: returns the actual
/// values `Φ_α(σ)` rather than coefficients of `σ^|α|`.
pub fn phi_values_at(max_order: u32, sigma_sq: &BigRational) -> Result<HashMap<Partition, BigRational>> {
    let mut values: HashMap<Partition, BigRational> = HashMap::new();
    for n in 0..=max_order {
        for alpha in partitions_canonical(n) {
            let v = if n % 2 == 1 {
                BigRational::zero()
            } else if alpha.len() == 1 {
                // Φ_(n) = -n(n-1)/2 σ² Φ_(n-2).
                let prev_key = if n == 2 { Partition::empty() } else { Partition::new(vec![n - 2])? };
                let prev = &values[&prev_key];
                -prev * sigma_sq * rational((n * (n - 1) / 2) as i64, 1)
            } else {
                recursion_value(&alpha, sigma_sq, |p| values.get(p))?
            };
            values.insert(alpha, v);
        }
    }
    Ok(values)
}

/// `|Φ_α| ≤ (1/2)^{|α|/2} |α|!` on the coefficient of `σ^|α|`; odd orders
/// must vanish.
pub fn satisfies_bound(alpha: &Partition, coeff: &ExactCoeff) -> bool {
    let n = alpha.order();
    if n % 2 == 1 {
        return coeff.is_zero();
    }
    let scaled = coeff.coefficient.abs() * BigRational::from_integer(BigInt::one() << (n / 2));
    scaled <= BigRational::from_integer(factorial(n))
}

/// `M_k = i^{-k} Φ_(1,...,1)`; zero for odd `k`.
pub fn moment(k: u32, table: &PhiTable) -> Result<ExactCoeff> {
    if k == 0 {
        return Err(invalid("moment order must be at least 1"));
    }
    if k > table.max_order {
        return Err(invalid(format!(
            "moment order {k} exceeds the table's maximum order {}",
            table.max_order
        )));
    }
    if k % 2 == 1 {
        return Ok(ExactCoeff::zero(k));
    }
    let phi = table
        .get(&Partition::ones(k as usize))
        .ok_or_else(|| Error::Internal(format!("Φ(1^{k}) missing from table")))?;
    let coefficient = if (k / 2) % 2 == 0 {
        phi.coefficient.clone()
    } else {
        -phi.coefficient.clone()
    };
    Ok(ExactCoeff::new(coefficient, k))
}

/// Rejects orders beyond `guard` before any work is done.
pub fn check_order_guard(max_order: u32, guard: u32) -> Result<()> {
    if max_order > guard {
        return Err(Error::ResourceLimit {
            what: format!("moment order {max_order}"),
            cap: guard as usize,
            knob: "--order-guard",
        });
    }
    Ok(())
}

pub const MOMENT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub order: u32,
    /// Exact numerator of the coefficient of `σ^order`, in decimal.
    pub num: String,
    pub den: String,
    /// `num/den · σ^order`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub schema_version: u32,
    pub sigma: f64,
    pub rows: Vec<MomentRow>,
}

/// Moments `1..=max_order` of the limiting law, evaluated at `sigma`.
pub fn moment_table(table: &PhiTable, sigma: f64) -> Result<MomentTable> {
    let rows = (1..=table.max_order)
        .map(|k| {
            let m = moment(k, table)?;
            Ok(MomentRow {
                order: k,
                num: m.numerator().to_string(),
                den: m.denominator().to_string(),
                value: m.value_at(sigma),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentTable {
        schema_version: MOMENT_SCHEMA_VERSION,
        sigma,
        rows,
    })
}
