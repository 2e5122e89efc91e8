//! Floating-point plumbing: scalar trait, double-double type, compensated
//! summation, combinatorial tables and the Gaussian moment integral.

pub mod combinatorics;
pub mod gaussian;
pub mod real;
pub mod sum;

pub use gaussian::{gaussian_moment_i, normalized_moments, DEFAULT_N_MAX};
pub use real::{DoubleDouble, Real};
pub use sum::{neumaier_sum, CompensatedSum};

/// Unnormalized sinc, sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}
