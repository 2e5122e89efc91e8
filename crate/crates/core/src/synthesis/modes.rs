use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::grid::{FieldFrame, GridSpec};
use crate::error::{Error, Result};
use crate::numeric::combinatorics::ln_factorial;
use crate::source::{slit_transmission, SlitGeometry};

/// Largest radial index accepted by [`lg_mode`].
pub const DEFAULT_P_MAX: usize = 10;

/// Generalized Laguerre polynomial L_p^α(x) by the three-term recurrence.
pub fn laguerre(p: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// LG_p^ℓ(r, φ) at z = 0, unit-normalized over the plane.
pub fn lg_value(l: i64, p: usize, x: f64, y: f64, w0: f64) -> Complex64 {
    let a = l.unsigned_abs() as usize;
    let r2 = x * x + y * y;
    let s = 2.0 * r2 / (w0 * w0);
    let ln_norm = 0.5 * (2f64.ln() + ln_factorial(p) - PI.ln() - ln_factorial(p + a));
    let radial = ln_norm.exp() / w0 * s.sqrt().powi(a as i32) * (-r2 / (w0 * w0)).exp() * laguerre(p, a as f64, s);
    Complex64::from_polar(radial, l as f64 * y.atan2(x))
}

pub fn lg_mode(l: i64, p: usize, grid: &GridSpec, w0: f64) -> Result<Vec<Complex64>> {
    grid.validate()?;
    if p > DEFAULT_P_MAX {
        return Err(Error::InvalidParameter(format!("radial index {p} exceeds {DEFAULT_P_MAX}")));
    }
    if !(w0 > 0.0) {
        return Err(Error::InvalidParameter(format!("beam waist must be > 0, got {w0}")));
    }
    let n = grid.n_pixels;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = grid.xy(i, j);
            out.push(lg_value(l, p, x, y, w0));
        }
    }
    Ok(out)
}

/// ⟨A, B⟩ = ∫ A* B dA on the grid.
pub fn inner(grid: &GridSpec, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let da = grid.pixel().powi(2);
    let mut re = crate::numeric::CompensatedSum::<f64>::new();
    let mut im = crate::numeric::CompensatedSum::<f64>::new();
    for (x, y) in a.iter().zip(b) {
        let v = x.conj() * y;
        re.add(v.re, v.re.abs());
        im.add(v.im, v.im.abs());
    }
    Complex64::new(re.value(), im.value()) * da
}

/// Radial profile paired with e^{iℓφ} to define the mode of charge ℓ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialBasis {
    /// LG_0^0(r) e^{iℓφ}: the incident beam's own radial profile. Normalized
    /// and orthogonal across ℓ, so the amplitude is a single-mode amplitude.
    #[default]
    Gaussian,
    /// Σ_{p ≤ p_max} LG_p^ℓ. Not normalized (norm² = p_max + 1) and not
    /// convergent in p_max; kept for comparison.
    Laguerre { p_max: usize },
}

impl RadialBasis {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RadialBasis::Laguerre { p_max } if p_max > DEFAULT_P_MAX => {
                Err(Error::InvalidParameter(format!("p_max {p_max} exceeds {DEFAULT_P_MAX}")))
            }
            _ => Ok(()),
        }
    }

    /// Complex mode profile of charge `l` on the grid.
    pub fn mode(&self, l: i64, grid: &GridSpec, w0: f64) -> Result<Vec<Complex64>> {
        self.validate()?;
        match *self {
            RadialBasis::Gaussian => {
                let g = lg_mode(0, 0, grid, w0)?;
                let n = grid.n_pixels;
                Ok(g.iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let (x, y) = grid.xy(k / n, k % n);
                        v * Complex64::from_polar(1.0, l as f64 * y.atan2(x))
                    })
                    .collect())
            }
            RadialBasis::Laguerre { p_max } => {
                let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
                for p in 0..=p_max {
                    for (a, v) in acc.iter_mut().zip(lg_mode(l, p, grid, w0)?) {
                        *a += v;
                    }
                }
                Ok(acc)
            }
        }
    }
}

/// Precomputed weights conj(u_ℓ) S(φ) dA, so that the amplitude of a frame
/// in mode u_ℓ behind the slits is a single weighted sum.
#[derive(Clone, Debug)]
pub struct OamProjector {
    pub l: i64,
    pub basis: RadialBasis,
    weights: Vec<Complex64>,
}

impl OamProjector {
    /// `geom = None` projects the unmasked field.
    pub fn new(l: i64, basis: RadialBasis, grid: &GridSpec, w0: f64, geom: Option<&SlitGeometry>) -> Result<Self> {
        let mut weights = basis.mode(l, grid, w0)?;
        let da = grid.pixel().powi(2);
        let n = grid.n_pixels;
        for (k, w) in weights.iter_mut().enumerate() {
            let (x, y) = grid.xy(k / n, k % n);
            let s = geom.map_or(1.0, |g| slit_transmission(y.atan2(x), g));
            *w = w.conj() * (s * da);
        }
        Ok(Self { l, basis, weights })
    }

    pub fn project(&self, frame: &FieldFrame) -> Complex64 {
        self.project_values(&frame.values)
    }

    pub fn project_values(&self, values: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, v) in self.weights.iter().zip(values) {
            acc += w * v;
        }
        acc
    }
}

/// Σ_{p ≤ p_max} ⟨LG_p^ℓ, E·S⟩.
pub fn project_onto_oam(
    frame: &FieldFrame,
    l: i64,
    p_max: usize,
    w0: f64,
    geom: Option<&SlitGeometry>,
) -> Result<Complex64> {
    Ok(OamProjector::new(l, RadialBasis::Laguerre { p_max }, &frame.grid, w0, geom)?.project(frame))
}

/// Power Σ_p |⟨LG_p^ℓ, E·S⟩|² summed over every radial index, i.e.
/// 2π ∫ |c_ℓ(r)|² r dr with c_ℓ(r) the ℓ-th angular harmonic of E·S. The frame
/// is resampled bilinearly on a polar grid (half-pixel radial step, 1024
/// azimuths) out to the inscribed circle.
pub fn oam_power_spectrum(frame: &FieldFrame, ls: &[i64], geom: Option<&SlitGeometry>) -> Vec<f64> {
    const N_PHI: usize = 1024;
    let grid = &frame.grid;
    let n = grid.n_pixels;
    let dx = grid.pixel();
    let dr = 0.5 * dx;
    let n_r = n;
    let mask: Vec<f64> =
        (0..N_PHI).map(|k| geom.map_or(1.0, |g| slit_transmission(2.0 * PI * k as f64 / N_PHI as f64, g))).collect();
    let fft = rustfft::FftPlanner::<f64>::new().plan_fft_forward(N_PHI);
    let sample = |x: f64, y: f64| -> Complex64 {
        // pixel j sits at coord(j) = (j − n/2 + 1/2)·dx
        let u = x / dx + 0.5 * n as f64 - 0.5;
        let v = y / dx + 0.5 * n as f64 - 0.5;
        let (j0, i0) = (u.floor(), v.floor());
        if j0 < 0.0 || i0 < 0.0 || j0 + 1.0 > (n - 1) as f64 || i0 + 1.0 > (n - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let (fu, fv) = (u - j0, v - i0);
        let (i0, j0) = (i0 as usize, j0 as usize);
        let at = |i: usize, j: usize| frame.values[i * n + j];
        at(i0, j0) * ((1.0 - fu) * (1.0 - fv))
            + at(i0, j0 + 1) * (fu * (1.0 - fv))
            + at(i0 + 1, j0) * ((1.0 - fu) * fv)
            + at(i0 + 1, j0 + 1) * (fu * fv)
    };
    let mut power = vec![0.0; ls.len()];
    let mut ring = vec![Complex64::new(0.0, 0.0); N_PHI];
    for k in 0..n_r {
        let r = (k as f64 + 0.5) * dr;
        for (m, c) in ring.iter_mut().enumerate() {
            let phi = 2.0 * PI * m as f64 / N_PHI as f64;
            *c = sample(r * phi.cos(), r * phi.sin()) * mask[m];
        }
        fft.process(&mut ring);
        for (p, &l) in power.iter_mut().zip(ls) {
            let c = ring[l.rem_euclid(N_PHI as i64) as usize] / N_PHI as f64;
            *p += 2.0 * PI * c.norm_sqr() * r * dr;
        }
    }
    power
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_low_orders() {
        let (a, x) = (2.0, 0.7);
        assert_eq!(laguerre(0, a, x), 1.0);
        assert!((laguerre(1, a, x) - (1.0 + a - x)).abs() < 1e-15);
        let l2 = 0.5 * (x * x - 2.0 * (a + 2.0) * x + (a + 1.0) * (a + 2.0));
        assert!((laguerre(2, a, x) - l2).abs() < 1e-14);
    }

    #[test]
    fn fundamental_mode_is_normalized_gaussian() {
        let w0 = 1.3;
        let v = lg_value(0, 0, 0.4, -0.2, w0);
        let expect = (2.0 / PI).sqrt() / w0 * (-(0.2f64) / (w0 * w0)).exp();
        assert!((v.re - expect).abs() < 1e-15 && v.im == 0.0);
    }
}
