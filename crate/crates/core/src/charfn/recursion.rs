//! Memoised evaluation of the `k`-distance recursions.
//!
//! Both the finite-`N` and the limit recursion express the `k`-argument CF
//! through `(k-1)`-argument values at tuples obtained by deleting one
//! argument, or by deleting it and adding it onto another. The functions are
//! symmetric, so each tuple is memoised in sorted form.
//!
//! On the diagonal every argument is an integer multiple of one base value
//! and remains so under deletion and merging; such tuples are keyed by
//! their sorted integer multipliers, which is exact.

use std::collections::HashMap;
use std::hash::Hash;

use crate::offsets::OffsetDistribution;

pub(crate) trait ArgKey: Clone + Eq + Hash {
    fn len(&self) -> usize;
    /// Coordinate `i`; lattice keys scale their multiplier by `base`.
    fn value(&self, i: usize, base: f64) -> f64;
    /// Removes coordinate `i`.
    fn without(&self, i: usize) -> Self;
    /// Removes coordinate `i` and adds it onto coordinate `j`.
    fn merged(&self, i: usize, j: usize) -> Self;
}

/// Sorted integer multipliers of a shared base.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct LatticeKey(pub Vec<i64>);

impl LatticeKey {
    pub fn new(mut multipliers: Vec<i64>) -> Self {
        multipliers.sort_unstable();
        Self(multipliers)
    }
}

impl ArgKey for LatticeKey {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn value(&self, i: usize, base: f64) -> f64 {
        self.0[i] as f64 * base
    }

    fn without(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.remove(i);
        Self(v)
    }

    fn merged(&self, i: usize, j: usize) -> Self {
        let mut v = self.0.clone();
        v[j] += v[i];
        v.remove(i);
        Self::new(v)
    }
}

/// Sorted real coordinates compared bitwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct RealKey(Vec<u64>);

impl RealKey {
    pub fn new(coords: &[f64]) -> Self {
        // ξ is even, so -0.0 and 0.0 are interchangeable.
        let mut v: Vec<f64> = coords.iter().map(|x| x + 0.0).collect();
        v.sort_by(f64::total_cmp);
        Self(v.into_iter().map(f64::to_bits).collect())
    }

    fn coords(&self) -> Vec<f64> {
        self.0.iter().map(|b| f64::from_bits(*b)).collect()
    }
}

impl ArgKey for RealKey {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn value(&self, i: usize, _base: f64) -> f64 {
        f64::from_bits(self.0[i])
    }

    fn without(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.remove(i);
        Self(v)
    }

    fn merged(&self, i: usize, j: usize) -> Self {
        let mut c = self.coords();
        c[j] += c[i];
        c.remove(i);
        Self::new(&c)
    }
}

/// Term weights and denominator of one recursion.
pub(crate) trait Kernel {
    /// Weight of the term that deletes argument `removed`.
    fn removal_weight(&self, removed: f64, total: f64) -> f64;
    /// Weight of the term that merges argument `removed` into another one.
    fn merge_weight(&self, removed: f64) -> f64;
    fn denominator(&self, coords: &[f64], total: f64) -> f64;
}

/// Stationary law of `k` distances among `N` particles.
pub(crate) struct FiniteKernel<'a> {
    pub dist: &'a OffsetDistribution,
    pub n: usize,
}

impl Kernel for FiniteKernel<'_> {
    fn removal_weight(&self, removed: f64, total: f64) -> f64 {
        self.dist.xi_scaled_unchecked(removed, self.n) + self.dist.xi_scaled_unchecked(total, self.n)
    }

    fn merge_weight(&self, removed: f64) -> f64 {
        self.dist.xi_scaled_unchecked(removed, self.n)
    }

    fn denominator(&self, coords: &[f64], total: f64) -> f64 {
        let k = coords.len() as f64;
        let n = self.n as f64;
        let xi_sum = self.dist.xi_scaled_unchecked(total, self.n)
            + coords
                .iter()
                .map(|s| self.dist.xi_scaled_unchecked(*s, self.n))
                .sum::<f64>();
        (k + 1.0) * (n - 1.0) + (k + 1.0 - n) * xi_sum
    }
}

/// `N → ∞` limit.
pub(crate) struct LimitKernel {
    pub sigma: f64,
}

impl Kernel for LimitKernel {
    fn removal_weight(&self, _removed: f64, _total: f64) -> f64 {
        2.0
    }

    fn merge_weight(&self, _removed: f64) -> f64 {
        1.0
    }

    fn denominator(&self, coords: &[f64], total: f64) -> f64 {
        let k = coords.len() as f64;
        let squares = coords.iter().map(|s| s * s).sum::<f64>() + total * total;
        k * (k + 1.0) + 0.5 * self.sigma * self.sigma * squares
    }
}

pub(crate) struct Recursion<K: ArgKey, R: Kernel> {
    kernel: R,
    base: f64,
    memo: HashMap<K, f64>,
}

impl<K: ArgKey, R: Kernel> Recursion<K, R> {
    pub fn new(kernel: R, base: f64) -> Self {
        Self {
            kernel,
            base,
            memo: HashMap::new(),
        }
    }

    pub fn eval(&mut self, key: &K) -> f64 {
        let k = key.len();
        if k == 0 {
            return 1.0;
        }
        if let Some(v) = self.memo.get(key) {
            return *v;
        }
        let coords: Vec<f64> = (0..k).map(|i| key.value(i, self.base)).collect();
        let total: f64 = coords.iter().sum();
        let mut numerator = 0.0;
        for i in 0..k {
            let dropped = self.eval(&key.without(i));
            numerator += dropped * self.kernel.removal_weight(coords[i], total);
            let merge_weight = self.kernel.merge_weight(coords[i]);
            for j in (0..k).filter(|&j| j != i) {
                numerator += self.eval(&key.merged(i, j)) * merge_weight;
            }
        }
        let value = numerator / self.kernel.denominator(&coords, total);
        debug_assert!(value.is_finite() && value.abs() <= 1.0 + 1e-9, "CF value {value}");
        self.memo.insert(key.clone(), value);
        value
    }

    #[cfg(test)]
    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }
}
