//! Standard normal density, distribution and quantile functions.
//!
//! Tail probabilities are computed from the complementary error function
//! directly, never as `1 - cdf`, so upper-tail survivals keep full relative
//! precision far beyond z = 8.

use libm::erfc;

use crate::optimize::find_root;

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Quantiles are bracketed to this range; `cdf(-38.5)` is below the smallest
/// positive normal double.
const QUANTILE_BRACKET: f64 = 38.5;

pub fn pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper-tail probability `1 - Φ(z)`.
pub fn sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Inverse of [`cdf`].
///
/// Solved by safeguarded root-finding on the log-CDF for the lower half and
/// by symmetry for the upper half (`1 - p` is exact for `p >= 0.5`).
pub fn quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        return -quantile(1.0 - p);
    }
    if p == 0.5 {
        return 0.0;
    }
    let target = p.ln();
    let g = |z: f64| {
        let c = cdf(z);
        if c > 0.0 {
            c.ln() - target
        } else {
            f64::NEG_INFINITY
        }
    };
    find_root(g, -QUANTILE_BRACKET, 0.0, 1e-14).unwrap_or(f64::NEG_INFINITY)
}

/// Inverse of [`sf`]: the z with upper-tail probability `p`.
pub fn inverse_sf(p: f64) -> f64 {
    -quantile(p)
}
