//! Standard-normal density, CDF and tail helpers used throughout the risk formulas.

use libm::erfc;

pub const SQRT_2PI: f64 = 2.506628274631000502415765284811;

/// Standard normal density phi(x).
#[inline]
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal CDF Phi(x), computed via erfc for full relative accuracy in
/// both tails.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail Q(x) = 1 - Phi(x) = Phi(-x).
#[inline]
pub fn q(x: f64) -> f64 {
    0.5 * erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}
