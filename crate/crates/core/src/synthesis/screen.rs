use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Kolmogorov phase power spectrum 0.023 r0^{−5/3} f^{−11/3}.
pub fn kolmogorov_psd(f: f64, r0: f64) -> f64 {
    0.023 * r0.powf(-5.0 / 3.0) * f.powf(-11.0 / 3.0)
}

/// In-place 2D transform of a row-major n×n array.
pub(crate) fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

/// Signed FFT frequency index of bin `k`.
fn freq_index(k: usize, n: usize) -> f64 {
    if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Φ = Re F⁻¹(M √φ Δf) with M circular complex Gaussian and the f = 0 bin
/// zeroed. Φ is in radians; `r0` is in the grid's length unit. The screen
/// from stream `stream` of `seed` is reproducible.
pub fn kolmogorov_screen_stream(grid: &GridSpec, r0: f64, seed: u64, stream: u64) -> Result<Vec<f64>> {
    grid.validate()?;
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidParameter(format!("Fried parameter must be > 0, got {r0}")));
    }
    let n = grid.n_pixels;
    let df = 1.0 / grid.extent;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut c = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let fy = freq_index(i, n) * df;
        for j in 0..n {
            let fx = freq_index(j, n) * df;
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let f = (fx * fx + fy * fy).sqrt();
            if f > 0.0 {
                c[i * n + j] = Complex64::new(re, im) * (kolmogorov_psd(f, r0).sqrt() * df);
            }
        }
    }
    // unnormalized inverse transform: Φ(x) = Σ_f c_f e^{2πi f·x}
    fft2(&mut c, n, true);
    Ok(c.into_iter().map(|v| v.re).collect())
}

pub fn kolmogorov_screen(grid: &GridSpec, r0: f64, seed: u64) -> Result<Vec<f64>> {
    kolmogorov_screen_stream(grid, r0, seed, 0)
}

/// Ensemble phase structure function D(Δ) = ⟨[Φ(x+Δ) − Φ(x)]²⟩ along both
/// axes, for pixel offsets `offsets`, restricted to the central half of the
/// grid.
pub fn structure_function(screens: &[Vec<f64>], grid: &GridSpec, offsets: &[usize]) -> Vec<f64> {
    let n = grid.n_pixels;
    let lo = n / 4;
    let hi = 3 * n / 4;
    offsets
        .iter()
        .map(|&d| {
            let mut acc = 0.0;
            let mut count = 0usize;
            for s in screens {
                for i in lo..hi {
                    for j in lo..hi {
                        if j + d < n {
                            acc += (s[i * n + j + d] - s[i * n + j]).powi(2);
                            count += 1;
                        }
                        if i + d < n {
                            acc += (s[(i + d) * n + j] - s[i * n + j]).powi(2);
                            count += 1;
                        }
                    }
                }
            }
            acc / count as f64
        })
        .collect()
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_round_trip() {
        let n = 8;
        let orig: Vec<Complex64> = (0..n * n).map(|k| Complex64::new(k as f64, (k * k % 7) as f64)).collect();
        let mut d = orig.clone();
        fft2(&mut d, n, false);
        fft2(&mut d, n, true);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a / (n * n) as f64 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn screen_is_reproducible_and_zero_mean() {
        let g = GridSpec::new(64, 8.0).unwrap();
        let a = kolmogorov_screen(&g, 0.5, 7).unwrap();
        assert_eq!(a, kolmogorov_screen(&g, 0.5, 7).unwrap());
        assert_ne!(a, kolmogorov_screen(&g, 0.5, 8).unwrap());
        // the zeroed DC bin makes the spatial mean exactly zero
        assert!(a.iter().sum::<f64>().abs() < 1e-9 * a.iter().map(|v| v.abs()).sum::<f64>());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(5.0 / 3.0)).collect();
        assert!((log_log_slope(&x, &y) - 5.0 / 3.0).abs() < 1e-12);
    }
}
