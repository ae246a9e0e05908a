//! Time-averaged statistics of recorded trajectories.
//!
//! Every recorded frame contributes all of its particles (or distances) as
//! samples. Standard errors come from batch means over per-frame averages,
//! which absorbs both the within-frame correlation and the autocorrelation
//! between frames.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.compensation);
    }
}

/// Raw moments `M_1..M_max_order`, mergeable across replicas.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentAccumulator {
    count: u64,
    sums: Vec<CompensatedSum>,
}

impl MomentAccumulator {
    pub fn new(max_order: usize) -> Result<Self> {
        if max_order == 0 {
            return Err(invalid("max moment order must be at least 1"));
        }
        Ok(Self {
            count: 0,
            sums: vec![CompensatedSum::default(); max_order],
        })
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let mut p = 1.0;
        for s in &mut self.sums {
            p *= x;
            s.add(p);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.sums.len(), other.sums.len(), "moment orders differ");
        self.count += other.count;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            a.merge(b);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn moments(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::EmptySample);
        }
        let n = self.count as f64;
        Ok(self.sums.iter().map(|s| s.value() / n).collect())
    }
}

/// `M_j = (1/n) Σ x_i^j` for `j = 1..=max_order`.
pub fn accumulate_moments(
    samples: impl IntoIterator<Item = f64>,
    max_order: usize,
) -> Result<Vec<f64>> {
    let mut acc = MomentAccumulator::new(max_order)?;
    for x in samples {
        acc.push(x);
    }
    acc.moments()
}

/// Equal-width histogram; out-of-range samples land in the edge bins so the
/// counts always add up to the number of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(hi > lo) {
            return Err(invalid(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins)
            .map(|i| if i == bins { hi } else { lo + i as f64 * width })
            .collect();
        Ok(Self {
            edges,
            counts: vec![0; bins],
        })
    }

    pub fn push(&mut self, x: f64) {
        let bins = self.counts.len();
        let lo = self.edges[0];
        let hi = self.edges[bins];
        let pos = ((x - lo) / (hi - lo) * bins as f64).floor();
        let idx = if pos.is_nan() || pos < 0.0 {
            0
        } else {
            (pos as usize).min(bins - 1)
        };
        self.counts[idx] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Gaussian kernel density estimate with standard deviation `bandwidth`,
/// evaluated at each grid point.
///
/// Contributions beyond `KDE_CUTOFF` bandwidths are below `1e-80` relative
/// and are skipped after sorting.
pub fn kde(samples: &[f64], bandwidth: f64, grid: &[f64]) -> Result<Vec<f64>> {
    const KDE_CUTOFF: f64 = 20.0;
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(invalid(format!("bandwidth must be positive, got {bandwidth}")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("kde grid must be strictly increasing"));
    }
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let norm = 1.0 / (samples.len() as f64 * bandwidth * (2.0 * PI).sqrt());
    let reach = KDE_CUTOFF * bandwidth;
    Ok(grid
        .iter()
        .map(|&y| {
            let lo = sorted.partition_point(|&x| x < y - reach);
            let hi = sorted.partition_point(|&x| x <= y + reach);
            let mut acc = CompensatedSum::default();
            for &x in &sorted[lo..hi] {
                let z = (y - x) / bandwidth;
                acc.add((-0.5 * z * z).exp());
            }
            acc.value() * norm
        })
        .collect())
}

/// `((1/n) Σ cos(s x), (1/n) Σ sin(s x))`.
pub fn empirical_cf(samples: &[f64], s: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    for &x in samples {
        let (sin, cos) = (s * x).sin_cos();
        re.add(cos);
        im.add(sin);
    }
    let n = samples.len() as f64;
    Ok((re.value() / n, im.value() / n))
}

/// CDF of the centred Laplace law with scale `b`.
pub fn laplace_cdf(x: f64, b: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / b).exp()
    } else {
        1.0 - 0.5 * (-x / b).exp()
    }
}

/// Kolmogorov–Smirnov distance between the samples and Laplace(`σ/√2`),
/// the law with variance `σ²`.
pub fn ks_laplace(samples: &[f64], sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let b = sigma / 2f64.sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ks_sorted(&sorted, |x| laplace_cdf(x, b)))
}

/// One-sample KS statistic of sorted data against a continuous CDF.
pub fn ks_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        // Treat ties as one jump of the empirical CDF.
        let x = sorted[i];
        let mut k = i;
        while k < sorted.len() && sorted[k] == x {
            k += 1;
        }
        let f = cdf(x);
        sup = sup.max((f - i as f64 / n).abs()).max((k as f64 / n - f).abs());
        i = k;
    }
    sup
}

/// Standard error of the mean of a correlated series by non-overlapping
/// batch means. Trailing elements that do not fill a batch are dropped.
pub fn batch_means_se(series: &[f64], batches: usize) -> Option<f64> {
    let batches = batches.min(series.len());
    if batches < 2 {
        return None;
    }
    let size = series.len() / batches;
    let means: Vec<f64> = series
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let b = means.len() as f64;
    let grand = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (b - 1.0);
    Some((var / b).sqrt())
}

/// Evenly spaced grid with inclusive endpoints; `count == 1` yields `[a]`.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { b } else { a + i as f64 * h })
                .collect()
        }
    }
}

/// Trapezoid rule on an arbitrary increasing grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcfPoint {
    pub s: f64,
    pub re: f64,
    pub im: f64,
    /// Batch-means standard error of `re`.
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub sample_count: u64,
    pub frame_count: u64,
    /// `moments[j-1] = M_j`.
    pub moments: Vec<f64>,
    /// Batch-means standard errors of `moments`.
    pub moment_se: Vec<Option<f64>>,
    pub histogram: Histogram,
    pub kde: KdeCurve,
    pub ecf: Vec<EcfPoint>,
    pub ks_laplace: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryOptions {
    pub max_order: usize,
    /// Offset standard deviation; sets the histogram span and the Laplace reference.
    pub sigma: f64,
    pub histogram_bins: usize,
    /// Histogram spans `±histogram_span·sigma`.
    pub histogram_span: f64,
    pub kde_bandwidth: f64,
    pub kde_grid: Vec<f64>,
    /// At most this many samples (evenly strided) enter the KDE.
    pub kde_max_samples: usize,
    pub ecf_points: Vec<f64>,
    pub batches: usize,
}

impl SummaryOptions {
    pub fn new(sigma: f64) -> Self {
        Self {
            max_order: 8,
            sigma,
            histogram_bins: 201,
            histogram_span: 6.0,
            kde_bandwidth: 0.01,
            kde_grid: linspace(-12.0 * sigma, 12.0 * sigma, 481),
            kde_max_samples: 200_000,
            ecf_points: vec![5.0, 10.0, 20.0, 40.0],
            batches: 32,
        }
    }
}

/// Collects frames of samples and reduces them to an [`EmpiricalSummary`].
#[derive(Debug, Clone)]
pub struct SummaryBuilder {
    options: SummaryOptions,
    samples: Vec<f64>,
    moments: MomentAccumulator,
    histogram: Histogram,
    /// Per-frame averages of `x^j`, one series per order.
    frame_powers: Vec<Vec<f64>>,
    /// Per-frame averages of `cos(s x)` and `sin(s x)`, one series per point.
    frame_cos: Vec<Vec<f64>>,
    frame_sin: Vec<Vec<f64>>,
}

impl SummaryBuilder {
    pub fn new(options: SummaryOptions) -> Result<Self> {
        if !(options.sigma > 0.0) {
            return Err(invalid("sigma must be positive"));
        }
        let span = options.histogram_span * options.sigma;
        let histogram = Histogram::new(-span, span, options.histogram_bins)?;
        let moments = MomentAccumulator::new(options.max_order)?;
        let k = options.ecf_points.len();
        Ok(Self {
            frame_powers: vec![Vec::new(); options.max_order],
            frame_cos: vec![Vec::new(); k],
            frame_sin: vec![Vec::new(); k],
            options,
            samples: Vec::new(),
            moments,
            histogram,
        })
    }

    pub fn push_frame(&mut self, frame: &[f64]) {
        if frame.is_empty() {
            return;
        }
        let m = frame.len() as f64;
        let mut powers = vec![0.0; self.options.max_order];
        for &x in frame {
            self.samples.push(x);
            self.moments.push(x);
            self.histogram.push(x);
            let mut p = 1.0;
            for acc in &mut powers {
                p *= x;
                *acc += p;
            }
        }
        for (series, acc) in self.frame_powers.iter_mut().zip(powers) {
            series.push(acc / m);
        }
        for (idx, &s) in self.options.ecf_points.iter().enumerate() {
            let (mut c, mut sn) = (0.0, 0.0);
            for &x in frame {
                let (a, b) = (s * x).sin_cos();
                sn += a;
                c += b;
            }
            self.frame_cos[idx].push(c / m);
            self.frame_sin[idx].push(sn / m);
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Appends the frames of `other`, as if they had been pushed after ours.
    pub fn merge(&mut self, other: Self) -> Result<()> {
        if self.options != other.options {
            return Err(invalid("cannot merge summaries built with different options"));
        }
        self.samples.extend(other.samples);
        self.moments.merge(&other.moments);
        for (a, b) in self.histogram.counts.iter_mut().zip(&other.histogram.counts) {
            *a += b;
        }
        let series = [
            (&mut self.frame_powers, other.frame_powers),
            (&mut self.frame_cos, other.frame_cos),
            (&mut self.frame_sin, other.frame_sin),
        ];
        for (mine, theirs) in series {
            for (a, b) in mine.iter_mut().zip(theirs) {
                a.extend(b);
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<EmpiricalSummary> {
        let opts = &self.options;
        let moments = self.moments.moments()?;
        let moment_se = self
            .frame_powers
            .iter()
            .map(|s| batch_means_se(s, opts.batches))
            .collect();
        let stride = self.samples.len().div_ceil(opts.kde_max_samples.max(1)).max(1);
        let kde_input: Vec<f64> = self.samples.iter().step_by(stride).copied().collect();
        let values = kde(&kde_input, opts.kde_bandwidth, &opts.kde_grid)?;
        let ecf = opts
            .ecf_points
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let (re, im) = empirical_cf(&self.samples, s)?;
                Ok(EcfPoint {
                    s,
                    re,
                    im,
                    se: batch_means_se(&self.frame_cos[i], opts.batches),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let ks = ks_laplace(&self.samples, opts.sigma)?;
        Ok(EmpiricalSummary {
            sample_count: self.samples.len() as u64,
            frame_count: self.frame_powers[0].len() as u64,
            moments,
            moment_se,
            histogram: self.histogram,
            kde: KdeCurve {
                bandwidth: opts.kde_bandwidth,
                grid: opts.kde_grid.clone(),
                values,
            },
            ecf,
            ks_laplace: ks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn laplace_samples(b: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed);
        (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>() - 0.5;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            })
            .collect()
    }

    #[test]
    fn constant_and_symmetric_moments() {
        let c = 1.7;
        let m = accumulate_moments([c, c, c], 2).unwrap();
        assert!((m[0] - c).abs() < 1e-15 && (m[1] - c * c).abs() < 1e-14);
        let m = accumulate_moments([-1.0, 1.0], 3).unwrap();
        assert_eq!(m, vec![0.0, 1.0, 0.0]);
        assert_eq!(accumulate_moments(std::iter::empty(), 2), Err(Error::EmptySample));
        assert!(accumulate_moments([1.0], 0).is_err());
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-12).abs() < 1e-24);
    }

    #[test]
    fn accumulator_merge_is_order_free() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.01 - 0.5).collect();
        let mut a = MomentAccumulator::new(4).unwrap();
        let mut b = MomentAccumulator::new(4).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            if i % 3 == 0 {
                a.push(x)
            } else {
                b.push(x)
            }
        }
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        let whole = accumulate_moments(xs.iter().copied(), 4).unwrap();
        for ((x, y), z) in ab.moments().unwrap().iter().zip(ba.moments().unwrap()).zip(whole) {
            assert!((x - y).abs() < 1e-15 && (x - z).abs() < 1e-15);
        }
    }

    #[test]
    fn histogram_counts_every_sample() {
        let mut h = Histogram::new(-1.0, 1.0, 4).unwrap();
        for x in [-5.0, -1.0, -0.1, 0.0, 0.99, 1.0, 7.0, f64::NAN] {
            h.push(x);
        }
        assert_eq!(h.counts, vec![3, 1, 1, 3]);
        assert_eq!(h.total(), 8);
        assert!(Histogram::new(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn kde_single_point() {
        let v = kde(&[0.0], 1.0, &[0.0]).unwrap();
        assert!((v[0] - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!(kde(&[0.0], 0.0, &[0.0]).is_err());
        assert!(kde(&[0.0], 1.0, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn kde_integrates_to_one() {
        let samples = laplace_samples(0.07, 5000, 8);
        let grid = linspace(-2.0, 2.0, 8001);
        let v = kde(&samples, 0.01, &grid).unwrap();
        assert!(v.iter().all(|x| *x >= 0.0));
        assert!((trapezoid(&grid, &v) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn kde_recovers_laplace_peak() {
        let b = 0.5;
        let samples = laplace_samples(b, 1_000_000, 21);
        let v = kde(&samples, 0.005, &[0.0]).unwrap();
        assert!((v[0] * 2.0 * b - 1.0).abs() < 0.05, "{}", v[0]);
    }

    #[test]
    fn ecf_basics() {
        let xs = laplace_samples(1.0, 1000, 2);
        assert_eq!(empirical_cf(&xs, 0.0).unwrap(), (1.0, 0.0));
        let a = 0.8;
        let (re, im) = empirical_cf(&[-a, a], 2.5).unwrap();
        assert!((re - (2.5 * a).cos()).abs() < 1e-15 && im.abs() < 1e-15);
        let (r1, i1) = empirical_cf(&xs, 1.3).unwrap();
        let (r2, i2) = empirical_cf(&xs, -1.3).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(i1, -i2);
        assert!(empirical_cf(&[], 1.0).is_err());
    }

    #[test]
    fn ks_point_mass_is_half() {
        assert_eq!(ks_laplace(&[0.0; 10], 1.0).unwrap(), 0.5);
        assert!(ks_laplace(&[0.0], 0.0).is_err());
        assert!(ks_laplace(&[], 1.0).is_err());
    }

    #[test]
    fn ks_of_exact_laplace_draws_is_small() {
        let sigma = 0.1;
        let n = 100_000;
        let samples = laplace_samples(sigma / 2f64.sqrt(), n, 77);
        let d = ks_laplace(&samples, sigma).unwrap();
        assert!(d < 1.95 / (n as f64).sqrt(), "{d}");
    }

    #[test]
    fn batch_means_of_iid_series() {
        let mut rng = stream(12);
        let xs: Vec<f64> = (0..64_000).map(|_| rng.random::<f64>()).collect();
        let se = batch_means_se(&xs, 32).unwrap();
        let exact = (1.0 / 12.0 / xs.len() as f64).sqrt();
        assert!((se / exact - 1.0).abs() < 0.5, "{se} vs {exact}");
        assert!(batch_means_se(&[1.0], 32).is_none());
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(-50.0, 50.0, 1001);
        assert_eq!(g.len(), 1001);
        assert_eq!(g[0], -50.0);
        assert_eq!(g[500], 0.0);
        assert_eq!(g[1000], 50.0);
        assert_eq!(linspace(3.0, 4.0, 1), vec![3.0]);
    }

    #[test]
    fn summary_invariants() {
        let sigma = 0.1;
        let xs = laplace_samples(sigma / 2f64.sqrt(), 20_000, 5);
        let mut builder = SummaryBuilder::new(SummaryOptions::new(sigma)).unwrap();
        for frame in xs.chunks(100) {
            builder.push_frame(frame);
        }
        let s = builder.finish().unwrap();
        assert_eq!(s.sample_count, 20_000);
        assert_eq!(s.frame_count, 200);
        assert_eq!(s.histogram.total(), s.sample_count);
        assert!(s.ecf.iter().all(|p| p.re.abs() <= 1.0 && p.se.is_some()));
        assert!((trapezoid(&s.kde.grid, &s.kde.values) - 1.0).abs() < 1e-6);
        assert!((s.moments[1] / (sigma * sigma) - 1.0).abs() < 0.1);
    }
    #[test]
    fn merged_builders_match_single_builder() {
        let xs = laplace_samples(0.07, 6_000, 9);
        let opts = SummaryOptions::new(0.1);
        let mut whole = SummaryBuilder::new(opts.clone()).unwrap();
        let mut first = SummaryBuilder::new(opts.clone()).unwrap();
        let mut second = SummaryBuilder::new(opts).unwrap();
        for (i, frame) in xs.chunks(60).enumerate() {
            whole.push_frame(frame);
            if i < 40 {
                first.push_frame(frame);
            } else {
                second.push_frame(frame);
            }
        }
        first.merge(second).unwrap();
        let (a, b) = (whole.finish().unwrap(), first.finish().unwrap());
        assert_eq!(a.histogram, b.histogram);
        assert_eq!(a.moment_se, b.moment_se);
        assert_eq!(a.ks_laplace, b.ks_laplace);
        for (x, y) in a.moments.iter().zip(&b.moments) {
            assert!((x - y).abs() <= 1e-15 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn merge_rejects_different_options() {
        let mut a = SummaryBuilder::new(SummaryOptions::new(0.1)).unwrap();
        let b = SummaryBuilder::new(SummaryOptions::new(0.2)).unwrap();
        assert!(a.merge(b).is_err());
    }
}
