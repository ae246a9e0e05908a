//! The jump-offset law `Δ` and its `N`-scaled version `Δ/√N`.
//!
//! All kinds are symmetric about zero and parametrised by their standard
//! deviation, so `sigma` has the same meaning whichever kind is chosen.
//! Because the laws are symmetric their characteristic functions are real.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Below this value of `|√3·σ·s|` the uniform CF switches to its Taylor series.
const SINC_TAYLOR_CUTOFF: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetKind {
    Gaussian,
    /// Uniform on `[-√3σ, √3σ]`.
    Uniform,
    /// `±σ` with probability one half each.
    #[serde(rename = "twopoint")]
    TwoPoint,
}

impl fmt::Display for OffsetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OffsetKind::Gaussian => "gaussian",
            OffsetKind::Uniform => "uniform",
            OffsetKind::TwoPoint => "twopoint",
        })
    }
}

impl FromStr for OffsetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(OffsetKind::Gaussian),
            "uniform" => Ok(OffsetKind::Uniform),
            "twopoint" | "two-point" | "rademacher" => Ok(OffsetKind::TwoPoint),
            other => Err(invalid(format!("unknown offset kind `{other}`"))),
        }
    }
}

/// Symmetric centred offset law with standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetDistribution {
    kind: OffsetKind,
    sigma: f64,
}

impl OffsetDistribution {
    pub fn new(kind: OffsetKind, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(format!("sigma must be positive and finite, got {sigma}")));
        }
        Ok(Self { kind, sigma })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(OffsetKind::Gaussian, sigma)
    }

    pub fn uniform(sigma: f64) -> Result<Self> {
        Self::new(OffsetKind::Uniform, sigma)
    }

    pub fn two_point(sigma: f64) -> Result<Self> {
        Self::new(OffsetKind::TwoPoint, sigma)
    }

    pub fn kind(&self) -> OffsetKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// Draws one offset.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            OffsetKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                self.sigma * z
            }
            OffsetKind::Uniform => {
                let half_width = SQRT_3 * self.sigma;
                rng.random_range(-half_width..=half_width)
            }
            OffsetKind::TwoPoint => {
                if rng.random::<bool>() {
                    self.sigma
                } else {
                    -self.sigma
                }
            }
        }
    }

    /// Characteristic function `ξ(s) = E[cos(sΔ)]`.
    pub fn xi(&self, s: f64) -> f64 {
        let sigma = self.sigma;
        match self.kind {
            OffsetKind::Gaussian => (-0.5 * sigma * sigma * s * s).exp(),
            OffsetKind::Uniform => sinc(SQRT_3 * sigma * s),
            OffsetKind::TwoPoint => (sigma * s).cos(),
        }
    }

    /// Characteristic function of `Δ/√N`.
    pub fn xi_scaled(&self, s: f64, n: usize) -> Result<f64> {
        if n < 2 {
            return Err(invalid(format!("particle count must be at least 2, got {n}")));
        }
        Ok(self.xi_scaled_unchecked(s, n))
    }

    #[inline]
    pub(crate) fn xi_scaled_unchecked(&self, s: f64, n: usize) -> f64 {
        self.xi(s / (n as f64).sqrt())
    }

    /// Density of `Δ`. The two-point law has none.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let sigma = self.sigma;
        match self.kind {
            OffsetKind::Gaussian => Ok(normal_pdf(x, sigma)),
            OffsetKind::Uniform => {
                let half_width = SQRT_3 * sigma;
                Ok(if x.abs() <= half_width {
                    1.0 / (2.0 * half_width)
                } else {
                    0.0
                })
            }
            OffsetKind::TwoPoint => Err(Error::Unsupported(
                "the two-point offset law has no Lebesgue density".into(),
            )),
        }
    }

    /// Density of `Δ/√N`.
    pub fn scaled_pdf(&self, x: f64, n: usize) -> Result<f64> {
        if n < 1 {
            return Err(invalid("scale count must be positive"));
        }
        let root = (n as f64).sqrt();
        Ok(root * self.pdf(root * x)?)
    }
}

/// `sin(x)/x`, evaluated by its Taylor series near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_TAYLOR_CUTOFF {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0
    } else {
        x.sin() / x
    }
}

/// Centred normal density with standard deviation `sd`.
pub fn normal_pdf(x: f64, sd: f64) -> f64 {
    let z = x / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}
