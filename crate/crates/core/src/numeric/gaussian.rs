//! I(n, a, b) = ∫ xⁿ exp(−a x² − b x) dx over the real line.

use super::real::Real;
use crate::error::{Error, Result};

/// Default order cap for [`gaussian_moment_i`].
pub const DEFAULT_N_MAX: usize = 256;

/// Evaluates I(n, a, b) with the two-term recurrence
/// I(n) = [(n−1) I(n−2) − b I(n−1)] / (2a), seeded by
/// I(0) = √(π/a) e^{b²/4a} and I(1) = −(b/2a) I(0).
pub fn gaussian_moment_i(n: usize, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::NonPositiveQuadratic(a));
    }
    if n > DEFAULT_N_MAX {
        return Err(Error::OrderCapExceeded { order: n, cap: DEFAULT_N_MAX });
    }
    let i0 = (std::f64::consts::PI / a).sqrt() * (b * b / (4.0 * a)).exp();
    if n == 0 {
        return Ok(i0);
    }
    let mut prev = i0;
    let mut cur = -b / (2.0 * a) * i0;
    for k in 2..=n {
        let next = ((k - 1) as f64 * prev - b * cur) / (2.0 * a);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Ratios I(k, a, b) / I(0, a, b) for k = 0..=n_max, i.e. the raw moments of
/// a normal law with mean −b/2a and variance 1/2a. All terms of the
/// recurrence share a sign, so the forward direction is stable.
pub fn normalized_moments<T: Real>(a: f64, b: f64, n_max: usize) -> Vec<T> {
    debug_assert!(a > 0.0);
    let mean = T::from_f64(-b) / T::from_f64(2.0 * a);
    let var = T::one() / T::from_f64(2.0 * a);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(T::one());
    if n_max >= 1 {
        out.push(mean);
    }
    for k in 2..=n_max {
        let v = mean * out[k - 1] + T::from_f64((k - 1) as f64) * var * out[k - 2];
        out.push(v);
    }
    out
}
