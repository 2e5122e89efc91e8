use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::grid::FieldFrame;
use super::modes::{OamProjector, RadialBasis};
use super::SynthesisConfig;
use crate::error::{Error, Result};
use crate::source::{covariance, SlitGeometry, SourceParams};

/// Fewest frames accepted for ensemble statistics.
pub const MIN_FRAMES: usize = 100;

/// Sample moments of two projected amplitudes in the model's convention
/// ⟨|α − μ|²⟩ = 2σ, ⟨(α − μ1)*(β − μ2)⟩ = 2 conj(η), with jackknife errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeStatistics {
    pub frames: usize,
    pub mu1: Complex64,
    pub mu2: Complex64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub eta: Complex64,
    pub stderr_mu1: f64,
    pub stderr_mu2: f64,
    pub stderr_sigma1: f64,
    pub stderr_sigma2: f64,
    pub stderr_eta: f64,
}

/// Projected amplitudes `out[k][frame]` of every frame in the ensemble onto
/// each ℓ in `ls`. Frames are generated on the fly and not kept.
pub fn mode_samples(cfg: &SynthesisConfig, ls: &[i64], geom: Option<&SlitGeometry>) -> Result<Vec<Vec<Complex64>>> {
    cfg.validate()?;
    let projectors =
        ls.iter().map(|&l| OamProjector::new(l, cfg.basis, &cfg.grid, cfg.w0, geom)).collect::<Result<Vec<_>>>()?;
    let per_frame = (0..cfg.frames as u64)
        .into_par_iter()
        .map(|k| {
            let f = cfg.frame(k)?;
            Ok(projectors.iter().map(|p| p.project(&f)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..ls.len()).map(|i| per_frame.iter().map(|row| row[i]).collect()).collect())
}

/// Means, raw second moments and cross moment of two samples.
type Moments = (Complex64, Complex64, f64, f64, Complex64);

fn moments(a: &[Complex64], b: &[Complex64]) -> Moments {
    let n = a.len() as f64;
    let mu1 = a.iter().sum::<Complex64>() / n;
    let mu2 = b.iter().sum::<Complex64>() / n;
    let s1 = a.iter().map(|x| (x - mu1).norm_sqr()).sum::<f64>() / (2.0 * (n - 1.0));
    let s2 = b.iter().map(|x| (x - mu2).norm_sqr()).sum::<f64>() / (2.0 * (n - 1.0));
    let c = a.iter().zip(b).map(|(x, y)| (x - mu1).conj() * (y - mu2)).sum::<Complex64>() / (2.0 * (n - 1.0));
    (mu1, mu2, s1, s2, c.conj())
}

/// Delete-one-block jackknife over at most 50 contiguous blocks.
pub fn statistics_from_samples(a: &[Complex64], b: &[Complex64]) -> Result<ModeStatistics> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter("sample vectors differ in length".into()));
    }
    if a.len() < MIN_FRAMES {
        return Err(Error::InsufficientFrames { required: MIN_FRAMES, got: a.len() });
    }
    let (mu1, mu2, sigma1, sigma2, eta) = moments(a, b);
    let n = a.len();
    let blocks = n.min(50);
    let edges: Vec<usize> = (0..=blocks).map(|k| k * n / blocks).collect();
    let leave: Vec<_> = (0..blocks)
        .map(|k| {
            let keep_a: Vec<Complex64> = a[..edges[k]].iter().chain(&a[edges[k + 1]..]).copied().collect();
            let keep_b: Vec<Complex64> = b[..edges[k]].iter().chain(&b[edges[k + 1]..]).copied().collect();
            moments(&keep_a, &keep_b)
        })
        .collect();
    let g = blocks as f64;
    let jk = |f: &dyn Fn(&Moments) -> Complex64| {
        let vals: Vec<Complex64> = leave.iter().map(f).collect();
        let m = vals.iter().sum::<Complex64>() / g;
        ((g - 1.0) / g * vals.iter().map(|v| (v - m).norm_sqr()).sum::<f64>()).sqrt()
    };
    Ok(ModeStatistics {
        frames: n,
        mu1,
        mu2,
        sigma1,
        sigma2,
        eta,
        stderr_mu1: jk(&|t| t.0),
        stderr_mu2: jk(&|t| t.1),
        stderr_sigma1: jk(&|t| Complex64::new(t.2, 0.0)),
        stderr_sigma2: jk(&|t| Complex64::new(t.3, 0.0)),
        stderr_eta: jk(&|t| t.4),
    })
}

/// Statistics of the (ℓ1, ℓ2) amplitudes over a stored frame collection.
pub fn empirical_statistics(
    frames: &[FieldFrame],
    l1: i64,
    l2: i64,
    geom: Option<&SlitGeometry>,
    basis: RadialBasis,
    w0: f64,
) -> Result<ModeStatistics> {
    if frames.len() < MIN_FRAMES {
        return Err(Error::InsufficientFrames { required: MIN_FRAMES, got: frames.len() });
    }
    let grid = frames[0].grid;
    let p1 = OamProjector::new(l1, basis, &grid, w0, geom)?;
    let a: Vec<Complex64> = frames.par_iter().map(|f| p1.project(f)).collect();
    let b = if l2 == l1 {
        a.clone()
    } else {
        let p2 = OamProjector::new(l2, basis, &grid, w0, geom)?;
        frames.par_iter().map(|f| p2.project(f)).collect()
    };
    statistics_from_samples(&a, &b)
}

/// λ̂ = 2 Σ ℓ² P_ℓ / Σ P_ℓ, the width parameter of a Gaussian e^{−ℓ²/λ}
/// spectrum with the same second moment.
pub fn spiral_bandwidth(ls: &[i64], powers: &[f64]) -> f64 {
    let total: f64 = powers.iter().sum();
    2.0 * ls.iter().zip(powers).map(|(l, p)| (l * l) as f64 * p).sum::<f64>() / total
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumFit {
    pub eta0: f64,
    pub lambda_bw: f64,
    /// RMS of (model − data)/data over the fitted modes.
    pub rms_relative: f64,
}

/// Fits covariance(ℓ, ℓ) of the slit model to an empirical σ̂_ℓ spectrum:
/// λ on a logarithmic grid, η0 by least squares at each λ.
pub fn fit_spectrum(ls: &[i64], sigma: &[f64], geom: &SlitGeometry) -> Result<SpectrumFit> {
    if ls.len() != sigma.len() || ls.is_empty() {
        return Err(Error::InvalidParameter("spectrum and mode list differ".into()));
    }
    let mut best: Option<SpectrumFit> = None;
    for k in 0..=120 {
        let lambda_bw = 10f64.powf(-0.5 + 3.5 * k as f64 / 120.0);
        let unit = SourceParams::new(Complex64::new(0.0, 0.0), 1.0, lambda_bw, 0.0)?;
        let model: Vec<f64> = ls.iter().map(|&l| covariance(l, l, geom, &unit).re).collect();
        let eta0 = model.iter().zip(sigma).map(|(m, s)| m * s / (s * s)).sum::<f64>()
            / model.iter().zip(sigma).map(|(m, s)| m * m / (s * s)).sum::<f64>();
        let rms =
            (model.iter().zip(sigma).map(|(m, s)| ((eta0 * m - s) / s).powi(2)).sum::<f64>() / ls.len() as f64).sqrt();
        if best.is_none_or(|b| rms < b.rms_relative) {
            best = Some(SpectrumFit { eta0, lambda_bw, rms_relative: rms });
        }
    }
    Ok(best.expect("nonempty grid"))
}
