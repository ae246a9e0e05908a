//! Closed forms for two and three particles.

use crate::offsets::OffsetDistribution;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Single-particle CF for `N = 2`: `ξ(s / (2√2))`.
pub fn phi2(s: f64, dist: &OffsetDistribution) -> f64 {
    dist.xi(s / (2.0 * std::f64::consts::SQRT_2))
}

/// `ψ_3(s) = ξ(s/√3) / (2 - ξ(s/√3))`.
pub fn psi3(s: f64, dist: &OffsetDistribution) -> f64 {
    let xi = dist.xi(s / SQRT_3);
    xi / (2.0 - xi)
}

/// Joint CF of `(D_12, D_13)` for `N = 3`.
pub fn psi3_2(s1: f64, s2: f64, dist: &OffsetDistribution) -> f64 {
    let xi = |s: f64| dist.xi(s / SQRT_3);
    let total = s1 + s2;
    (psi3(s1, dist) * (xi(s2) + xi(total))
        + psi3(s2, dist) * (xi(s1) + xi(total))
        + psi3(total, dist) * (xi(s1) + xi(s2)))
        / 6.0
}

/// Single-particle CF for `N = 3`, i.e. `ψ_3^2(s/3, s/3)` written out.
pub fn phi3(s: f64, dist: &OffsetDistribution) -> f64 {
    let a = dist.xi(s / (3.0 * SQRT_3));
    let b = dist.xi(2.0 * s / (3.0 * SQRT_3));
    (psi3(s / 3.0, dist) * (a + b) + psi3(2.0 * s / 3.0, dist) * a) / 3.0
}
