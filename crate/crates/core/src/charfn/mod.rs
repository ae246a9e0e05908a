//! Characteristic functions and densities of the stationary laws.
//!
//! Notation: `ψ_N` is the CF of one inter-particle distance `D_12` at
//! stationarity, `ψ_N^k` the joint CF of `(D_12, ..., D_1(k+1))`, `ψ_∞^k`
//! its `N → ∞` limit, `φ_N` the CF of one renormalised position, and
//! `γ_N(s) = ψ_∞^{N-1}(s/N, ..., s/N)`.

pub mod closed;
mod recursion;

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::offsets::{normal_pdf, OffsetDistribution, OffsetKind};
use recursion::{FiniteKernel, LatticeKey, LimitKernel, RealKey, Recursion};

/// Default largest `N` accepted by the diagonal evaluators.
pub const DEFAULT_DIAG_CAP: usize = 12;

/// Arguments `(s_1, ..., s_k)` of a joint CF.
///
/// When every coordinate is an integer multiple of one base value the
/// vector carries that lattice, which makes memoisation exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgVector {
    coords: Vec<f64>,
    lattice: Option<(f64, Vec<i64>)>,
}

impl ArgVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("argument vector must have at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("argument coordinates must be finite"));
        }
        Ok(Self {
            coords,
            lattice: None,
        })
    }

    /// Coordinates `multipliers[i] · base`.
    pub fn lattice(base: f64, multipliers: Vec<i64>) -> Result<Self> {
        if !base.is_finite() {
            return Err(invalid("lattice base must be finite"));
        }
        let coords = multipliers.iter().map(|m| *m as f64 * base).collect();
        let mut v = Self::new(coords)?;
        v.lattice = Some((base, multipliers));
        Ok(v)
    }

    /// `k` copies of `base`.
    pub fn diagonal(base: f64, k: usize) -> Result<Self> {
        Self::lattice(base, vec![1; k])
    }

    pub fn k(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// `ψ_N(s) = ξ_N(s) / (N - 1 - (N - 2) ξ_N(s))` with `ξ_N(s) = ξ(s/√N)`.
pub fn psi_n(s: f64, n: usize, dist: &OffsetDistribution) -> Result<f64> {
    let xi = dist.xi_scaled(s, n)?;
    let n = n as f64;
    Ok(xi / (n - 1.0 - (n - 2.0) * xi))
}

/// `ψ_∞(s) = 2 / (2 + σ² s²)`, the CF of Laplace(`σ/√2`).
pub fn psi_inf1(s: f64, sigma: f64) -> f64 {
    2.0 / (2.0 + sigma * sigma * s * s)
}

/// Density of Laplace(`σ/√2`).
pub fn laplace_pdf(y: f64, sigma: f64) -> f64 {
    (-SQRT_2 * y.abs() / sigma).exp() / (SQRT_2 * sigma)
}

/// Number of mixture terms kept by [`mu_n_pdf_series`]: the smallest `K`
/// with `r^K / (N - 2) ≤ eps · (1 - r)`, `r = (N-2)/(N-1)`.
pub fn series_terms(n: usize, eps: f64) -> Result<usize> {
    if n <= 2 {
        return Err(invalid(format!("the mixture series needs N > 2, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    let nf = n as f64;
    let r = (nf - 2.0) / (nf - 1.0);
    let k = ((eps * (1.0 - r) * (nf - 2.0)).ln() / r.ln()).ceil();
    Ok((k.max(1.0)) as usize)
}

/// Stationary density of `D_12` for Gaussian offsets: the mixture
/// `(1/(N-2)) Σ_k r^k · Normal(0, kσ²/N)`, truncated so the dropped mass is
/// below `eps`.
pub fn mu_n_pdf_series(y: f64, n: usize, sigma: f64, eps: f64) -> Result<f64> {
    let terms = series_terms(n, eps)?;
    if !(sigma > 0.0) {
        return Err(invalid("sigma must be positive"));
    }
    let nf = n as f64;
    let r = (nf - 2.0) / (nf - 1.0);
    let mut weight = 1.0 / (nf - 2.0);
    let mut acc = 0.0;
    for k in 1..=terms {
        weight *= r;
        let sd = sigma * (k as f64 / nf).sqrt();
        acc += weight * normal_pdf(y, sd);
    }
    Ok(acc)
}

/// `ψ_N^k(s_1, ..., s_k)` for `1 ≤ k < N`.
pub fn psi_n_k(args: &ArgVector, n: usize, dist: &OffsetDistribution) -> Result<f64> {
    let k = args.k();
    if n < 2 || k >= n {
        return Err(invalid(format!("need 1 ≤ k < N, got k = {k}, N = {n}")));
    }
    let kernel = FiniteKernel { dist, n };
    Ok(match &args.lattice {
        Some((base, m)) => Recursion::new(kernel, *base).eval(&LatticeKey::new(m.clone())),
        None => Recursion::new(kernel, 0.0).eval(&RealKey::new(&args.coords)),
    })
}

/// `ψ_∞^k(s_1, ..., s_k)`.
pub fn psi_inf_k(args: &ArgVector, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid("sigma must be positive"));
    }
    let kernel = LimitKernel { sigma };
    Ok(match &args.lattice {
        Some((base, m)) => Recursion::new(kernel, *base).eval(&LatticeKey::new(m.clone())),
        None => Recursion::new(kernel, 0.0).eval(&RealKey::new(&args.coords)),
    })
}

/// Rejects `n` above `cap`; the recursions grow with the number of
/// partitions of `n`.
pub fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!("need N ≥ 2, got {n}")));
    }
    if n > cap {
        return Err(Error::ResourceLimit {
            what: format!("diagonal evaluation with N = {n}"),
            cap,
            knob: "--cap",
        });
    }
    Ok(())
}

/// `φ_N(s) = ψ_N^{N-1}(s/N, ..., s/N)`, the stationary CF of one
/// renormalised position.
pub fn phi_n_diag(s: f64, n: usize, dist: &OffsetDistribution, cap: usize) -> Result<f64> {
    check_cap(n, cap)?;
    psi_n_k(&ArgVector::diagonal(s / n as f64, n - 1)?, n, dist)
}

/// `γ_N(s) = ψ_∞^{N-1}(s/N, ..., s/N)`.
pub fn gamma_n(s: f64, n: usize, sigma: f64, cap: usize) -> Result<f64> {
    check_cap(n, cap)?;
    psi_inf_k(&ArgVector::diagonal(s / n as f64, n - 1)?, sigma)
}

/// Stationary joint density of `(D_12, D_13)` for three particles with
/// Gaussian offsets.
pub fn rho_d2_n3(y1: f64, y2: f64, dist: &OffsetDistribution, eps: f64) -> Result<f64> {
    if dist.kind() != OffsetKind::Gaussian {
        return Err(Error::Unsupported(format!(
            "the three-particle joint density is only available for Gaussian offsets, not {}",
            dist.kind()
        )));
    }
    let sigma = dist.sigma();
    let rho_d = |y: f64| mu_n_pdf_series(y, 3, sigma, eps);
    let rho_delta = |y: f64| dist.scaled_pdf(y, 3);
    let d12 = y1 - y2;
    let total = rho_d(d12)? * (rho_delta(y1)? + rho_delta(y2)?)
        + rho_d(y2)? * (rho_delta(y1)? + rho_delta(d12)?)
        + rho_d(y1)? * (rho_delta(y2)? + rho_delta(d12)?);
    Ok(total / 6.0)
}

/// Evaluated CF or density on a one-dimensional grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfGrid {
    pub mode: String,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub sigma: f64,
    pub points: Vec<GridPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub s: f64,
    pub value: f64,
}

/// Evaluates `f` at every point, in parallel when the `parallel` feature is on.
pub fn evaluate_grid<F>(points: &[f64], f: F) -> Result<Vec<GridPoint>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points
            .par_iter()
            .map(|&s| f(s).map(|value| GridPoint { s, value }))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points
            .iter()
            .map(|&s| f(s).map(|value| GridPoint { s, value }))
            .collect()
    }
}

/// `∫ f(y) cos(s y) dy` by composite Simpson on `[-half_width, half_width]`.
/// Used to move between densities and their (real) CFs.
pub fn cosine_transform(f: impl Fn(f64) -> f64, s: f64, half_width: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = 2.0 * half_width / n as f64;
    let g = |y: f64| f(y) * (s * y).cos();
    let mut acc = g(-half_width) + g(half_width);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(-half_width + i as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(sigma: f64) -> OffsetDistribution {
        OffsetDistribution::gaussian(sigma).unwrap()
    }

    fn kinds(sigma: f64) -> Vec<OffsetDistribution> {
        vec![
            gauss(sigma),
            OffsetDistribution::uniform(sigma).unwrap(),
            OffsetDistribution::two_point(sigma).unwrap(),
        ]
    }

    #[test]
    fn psi_n_basics() {
        for d in kinds(0.1) {
            assert_eq!(psi_n(0.0, 100, &d).unwrap(), 1.0);
            for s in [0.3, 4.0, 27.0] {
                let expected = d.xi(s / 2f64.sqrt());
                assert!((psi_n(s, 2, &d).unwrap() - expected).abs() < 1e-15);
            }
        }
        assert!(psi_n(1.0, 1, &gauss(1.0)).is_err());
    }

    #[test]
    fn psi_n_matches_geometric_series() {
        let d = gauss(0.1);
        let n = 100usize;
        let s = 20.0;
        let r = (n as f64 - 2.0) / (n as f64 - 1.0);
        let xi = d.xi_scaled(s, n).unwrap();
        // (1/(N-2)) Σ_{k≥1} (r ξ_N)^k, summed until the tail is below 1e-12.
        let (mut term, mut acc, mut k) = (1.0, 0.0, 0);
        loop {
            k += 1;
            term *= r * xi;
            acc += term;
            let tail = term.abs() * (r * xi).abs() / (1.0 - (r * xi).abs()) / (n as f64 - 2.0);
            if tail < 1e-12 || k > 1_000_000 {
                break;
            }
        }
        acc /= n as f64 - 2.0;
        assert!((psi_n(s, n, &d).unwrap() - acc).abs() < 1e-9);
    }

    #[test]
    fn psi_inf1_values() {
        let sigma = 0.1;
        assert_eq!(psi_inf1(0.0, sigma), 1.0);
        assert!((psi_inf1(2f64.sqrt() / sigma, sigma) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn psi_n_gap_shrinks_like_one_over_n() {
        let d = gauss(0.1);
        let gap = |n| (psi_n(5.0, n, &d).unwrap() - psi_inf1(5.0, 0.1)).abs();
        let ratio = gap(1000) / gap(2000);
        assert!((ratio / 2.0 - 1.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn laplace_pdf_mass_and_variance() {
        let sigma = 0.3;
        assert!((laplace_pdf(0.0, sigma) - 1.0 / (SQRT_2 * sigma)).abs() < 1e-15);
        assert_eq!(laplace_pdf(0.2, sigma), laplace_pdf(-0.2, sigma));
        let w = 40.0 * sigma;
        let mass = cosine_transform(|y| laplace_pdf(y, sigma), 0.0, w, 400_000);
        // The kink at 0 limits Simpson to second order; split at the origin.
        let half = |f: &dyn Fn(f64) -> f64| {
            let n = 200_000;
            let h = w / n as f64;
            let mut acc = f(0.0) + f(w);
            for i in 1..n {
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            acc * h / 3.0
        };
        let mass_split = 2.0 * half(&|y| laplace_pdf(y, sigma));
        let m2 = 2.0 * half(&|y| y * y * laplace_pdf(y, sigma));
        assert!((mass_split - 1.0).abs() < 1e-9, "{mass_split}");
        assert!((m2 - sigma * sigma).abs() < 1e-6);
        assert!((mass - 1.0).abs() < 1e-6);
    }

    #[test]
    fn series_requires_three_particles() {
        assert!(mu_n_pdf_series(0.0, 2, 0.1, 1e-9).is_err());
        assert!(series_terms(5, 0.0).is_err());
    }

    #[test]
    fn series_tail_bound_holds() {
        for n in [3usize, 10, 100] {
            let eps = 1e-8;
            let k = series_terms(n, eps).unwrap();
            let nf = n as f64;
            let r = (nf - 2.0) / (nf - 1.0);
            let dropped = r.powi(k as i32 + 1) / ((nf - 2.0) * (1.0 - r));
            assert!(dropped <= eps);
        }
    }

    #[test]
    fn mixture_pdf_mass_and_fourier() {
        let sigma = 0.1;
        let eps = 1e-10;
        for n in [3usize, 10] {
            let f = |y: f64| mu_n_pdf_series(y, n, sigma, eps).unwrap();
            let w = 4.0 * sigma * (series_terms(n, eps).unwrap() as f64 / n as f64).sqrt() + sigma;
            let mass = cosine_transform(f, 0.0, w, 40_000);
            assert!((mass - 1.0).abs() < 2.0 * eps + 1e-9, "n={n}: {mass}");
            let cf = cosine_transform(f, 10.0, w, 40_000);
            let expected = psi_n(10.0, n, &gauss(sigma)).unwrap();
            assert!((cf - expected).abs() < eps + 1e-8, "n={n}: {cf} vs {expected}");
        }
    }

    #[test]
    fn mixture_pdf_approaches_laplace_peak() {
        let sigma = 0.1;
        let v = mu_n_pdf_series(0.0, 10_000, sigma, 1e-9).unwrap();
        assert!((v / laplace_pdf(0.0, sigma) - 1.0).abs() < 0.02, "{v}");
    }

    #[test]
    fn psi_n_k_reduces_to_psi_n() {
        for d in kinds(0.1) {
            for n in [2usize, 3, 10, 100] {
                for s in [-50.0, -3.0, 0.0, 7.5, 41.0] {
                    let a = psi_n_k(&ArgVector::new(vec![s]).unwrap(), n, &d).unwrap();
                    assert!((a - psi_n(s, n, &d).unwrap()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn psi_n_k_domain() {
        let d = gauss(0.1);
        assert!(psi_n_k(&ArgVector::new(vec![1.0, 2.0]).unwrap(), 2, &d).is_err());
        assert!(ArgVector::new(vec![]).is_err());
        assert!(ArgVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn psi_n_k_three_particle_closed_form() {
        for d in kinds(0.1) {
            for (s1, s2) in [(1.0, 2.0), (-10.0, 4.0), (25.0, 25.0), (0.0, -7.0)] {
                let a = psi_n_k(&ArgVector::new(vec![s1, s2]).unwrap(), 3, &d).unwrap();
                let b = closed::psi3_2(s1, s2, &d);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trailing_zero_marginalises() {
        let d = OffsetDistribution::uniform(0.2).unwrap();
        let args = [3.0, -1.5, 8.0];
        for k in 1..=3 {
            let head = ArgVector::new(args[..k - 1].to_vec());
            let mut with_zero = args[..k - 1].to_vec();
            with_zero.push(0.0);
            let full = ArgVector::new(with_zero).unwrap();
            let lower = match head {
                Ok(h) => psi_n_k(&h, 6, &d).unwrap(),
                Err(_) => 1.0,
            };
            assert!((psi_n_k(&full, 6, &d).unwrap() - lower).abs() < 1e-12);
            let lower_inf = match ArgVector::new(args[..k - 1].to_vec()) {
                Ok(h) => psi_inf_k(&h, 0.2).unwrap(),
                Err(_) => 1.0,
            };
            assert!((psi_inf_k(&full, 0.2).unwrap() - lower_inf).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_invariance() {
        let sigma = 0.1;
        let (a, b, c) = (4.0, -9.0, 13.0);
        let x = psi_inf_k(&ArgVector::new(vec![a, b, c]).unwrap(), sigma).unwrap();
        let y = psi_inf_k(&ArgVector::new(vec![c, a, b]).unwrap(), sigma).unwrap();
        assert!((x - y).abs() < 1e-12);
        let d = gauss(sigma);
        let x = psi_n_k(&ArgVector::new(vec![a, b, c]).unwrap(), 5, &d).unwrap();
        let y = psi_n_k(&ArgVector::new(vec![b, c, a]).unwrap(), 5, &d).unwrap();
        assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn psi_inf_k1_is_laplace_cf() {
        for s in [-50.0, -1.0, 0.0, 3.0, 50.0] {
            let v = psi_inf_k(&ArgVector::new(vec![s]).unwrap(), 0.1).unwrap();
            assert!((v - psi_inf1(s, 0.1)).abs() < 1e-15);
        }
    }

    #[test]
    fn lattice_and_real_routes_agree() {
        let d = gauss(0.1);
        let base = 1.7;
        let m = vec![1, 2, 2, 5];
        let lat = ArgVector::lattice(base, m.clone()).unwrap();
        let real = ArgVector::new(m.iter().map(|x| *x as f64 * base).collect()).unwrap();
        let a = psi_n_k(&lat, 9, &d).unwrap();
        let b = psi_n_k(&real, 9, &d).unwrap();
        assert!((a - b).abs() < 1e-13);
        let a = psi_inf_k(&lat, 0.1).unwrap();
        let b = psi_inf_k(&real, 0.1).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn evenness() {
        let d = gauss(0.1);
        let args = vec![2.0, -6.0, 11.0];
        let neg: Vec<f64> = args.iter().map(|x| -x).collect();
        let a = psi_n_k(&ArgVector::new(args).unwrap(), 7, &d).unwrap();
        let b = psi_n_k(&ArgVector::new(neg).unwrap(), 7, &d).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn phi_n_small_cases() {
        for d in kinds(0.1) {
            for s in [0.0, 1.0, 13.0, -30.0] {
                let two = phi_n_diag(s, 2, &d, DEFAULT_DIAG_CAP).unwrap();
                assert!((two - closed::phi2(s, &d)).abs() < 1e-15);
                let three = phi_n_diag(s, 3, &d, DEFAULT_DIAG_CAP).unwrap();
                assert!((three - closed::phi3(s, &d)).abs() < 1e-12);
            }
            assert_eq!(phi_n_diag(0.0, 7, &d, DEFAULT_DIAG_CAP).unwrap(), 1.0);
        }
    }

    #[test]
    fn diagonal_cap_is_enforced() {
        let d = gauss(0.1);
        let err = phi_n_diag(1.0, 13, &d, 12).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { cap: 12, .. }));
        assert!(gamma_n(1.0, 20, 0.1, 12).is_err());
        assert!(gamma_n(1.0, 20, 0.1, 20).is_ok());
    }

    #[test]
    fn gamma_n_properties() {
        let sigma = 0.1;
        for n in [2usize, 5, 12] {
            assert_eq!(gamma_n(0.0, n, sigma, 12).unwrap(), 1.0);
        }
        for s in [1.0 / sigma, 2.0 / sigma] {
            let g = |n| gamma_n(s, n, sigma, 12).unwrap();
            assert!((g(8) - g(12)).abs() < (g(4) - g(8)).abs());
        }
    }

    #[test]
    fn gamma_n_curvature_tracks_limit_variance() {
        // γ_N''(0) = -(N-1)σ²/(2N) exactly, approaching -σ²/2.
        let sigma = 0.1;
        let h = 0.05 / sigma;
        for n in [4usize, 8, 12] {
            let c = (gamma_n(h, n, sigma, 12).unwrap() - 2.0 + gamma_n(-h, n, sigma, 12).unwrap())
                / (h * h);
            let exact = -(n as f64 - 1.0) * sigma * sigma / (2.0 * n as f64);
            assert!((c - exact).abs() < 1e-3 * sigma * sigma, "n={n}: {c} vs {exact}");
        }
    }

    #[test]
    fn rho_d2_symmetry_and_errors() {
        let d = gauss(0.1);
        for (a, b) in [(0.01, 0.05), (-0.1, 0.03), (0.2, 0.2)] {
            let x = rho_d2_n3(a, b, &d, 1e-10).unwrap();
            let y = rho_d2_n3(b, a, &d, 1e-10).unwrap();
            assert!((x - y).abs() < 1e-12 * x.abs().max(1.0));
        }
        let u = OffsetDistribution::uniform(0.1).unwrap();
        assert!(matches!(rho_d2_n3(0.0, 0.0, &u, 1e-9), Err(Error::Unsupported(_))));
    }

    fn midpoint_2d(f: impl Fn(f64, f64) -> f64, w: f64, m: usize) -> f64 {
        let h = 2.0 * w / m as f64;
        let mut acc = 0.0;
        for i in 0..m {
            let y1 = -w + (i as f64 + 0.5) * h;
            for j in 0..m {
                let y2 = -w + (j as f64 + 0.5) * h;
                acc += f(y1, y2);
            }
        }
        acc * h * h
    }

    #[test]
    fn rho_d2_mass_and_fourier() {
        let sigma = 0.1;
        let d = gauss(sigma);
        let eps = 1e-8;
        let w = 1.2;
        let m = 700;
        let values: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let y1 = -w + (i as f64 + 0.5) * 2.0 * w / m as f64;
                (0..m)
                    .map(|j| {
                        let y2 = -w + (j as f64 + 0.5) * 2.0 * w / m as f64;
                        rho_d2_n3(y1, y2, &d, eps).unwrap()
                    })
                    .collect()
            })
            .collect();
        let h = 2.0 * w / m as f64;
        let grid = |i: usize| -w + (i as f64 + 0.5) * h;
        let lookup = |y1: f64, y2: f64| {
            let i = ((y1 + w) / h - 0.5).round() as usize;
            let j = ((y2 + w) / h - 0.5).round() as usize;
            debug_assert!((grid(i) - y1).abs() < 1e-9);
            values[i][j]
        };
        let mass = midpoint_2d(lookup, w, m);
        assert!((mass - 1.0).abs() < 5.0 * eps + 1e-6, "{mass}");
        let (s1, s2) = (1.0 / sigma, 2.0 / sigma);
        let cf = midpoint_2d(|y1, y2| lookup(y1, y2) * (s1 * y1 + s2 * y2).cos(), w, m);
        let expected = psi_n_k(&ArgVector::new(vec![s1, s2]).unwrap(), 3, &d).unwrap();
        assert!((cf - expected).abs() < 1e-4, "{cf} vs {expected}");
    }
}
