//! Sampling path: complex-Gaussian amplitudes drawn from Γ, split by the
//! beam splitter and detected as Poisson counts.
//!
//! Each batch owns a ChaCha20 stream selected by its index, so the result is
//! the same whatever the number of worker threads.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{state_digest, JointPnrDistribution};
use crate::source::ModePairGaussian;

/// Smallest sample count for a run whose statistics are quoted.
pub const ACCEPTANCE_MIN_SAMPLES: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub sample_count: u64,
    pub seed: u64,
    #[serde(default = "default_batch")]
    pub batch: u64,
}

fn default_batch() -> u64 {
    10_000
}

impl McConfig {
    pub fn new(sample_count: u64, seed: u64) -> Self {
        Self { sample_count, seed, batch: default_batch() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 || self.batch == 0 {
            return Err(Error::InvalidParameter("sample_count and batch must be positive".into()));
        }
        Ok(())
    }

    pub fn is_acceptance_grade(&self) -> bool {
        self.sample_count >= ACCEPTANCE_MIN_SAMPLES
    }

    /// (index, size) of every batch.
    fn batches(&self) -> Vec<(u64, u64)> {
        let n = self.sample_count.div_ceil(self.batch);
        (0..n).map(|i| (i, self.batch.min(self.sample_count - i * self.batch))).collect()
    }

    fn rng(&self, batch: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(batch);
        rng
    }
}

/// Draws (α, β) from the real Gaussian with mean (Re μ1, Im μ1, Re μ2, Im μ2)
/// and covariance Γ through the symmetric square root of Γ.
///
/// A coincident pair (ℓ1 = ℓ2) has a rank-2 Γ; its square root is still well
/// defined and the draws satisfy β = α exactly up to round-off.
#[derive(Clone, Debug)]
pub struct AmplitudeSampler {
    mean: Vector4<f64>,
    root: Matrix4<f64>,
}

impl AmplitudeSampler {
    pub fn new(state: &ModePairGaussian) -> Result<Self> {
        let g = Matrix4::from_fn(|i, j| state.gamma[i][j]);
        let eig = SymmetricEigen::new(g);
        let scale = g.trace();
        if eig.eigenvalues.iter().any(|&e| e < -1e-12 * scale) {
            return Err(Error::DegenerateCovariance { det: state.determinant(), threshold: 0.0 });
        }
        let sqrt = eig.eigenvalues.map(|e| e.max(0.0).sqrt());
        let root = eig.eigenvectors * Matrix4::from_diagonal(&sqrt) * eig.eigenvectors.transpose();
        let mean = Vector4::new(state.mu1.re, state.mu1.im, state.mu2.re, state.mu2.im);
        Ok(Self { mean, root })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Complex64, Complex64) {
        let z = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let x = self.mean + self.root * z;
        (Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]))
    }
}

/// All `sample_count` amplitude pairs, in batch order.
pub fn sample_amplitudes(state: &ModePairGaussian, cfg: &McConfig) -> Result<Vec<(Complex64, Complex64)>> {
    cfg.validate()?;
    let sampler = AmplitudeSampler::new(state)?;
    let parts: Vec<Vec<(Complex64, Complex64)>> = cfg
        .batches()
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = cfg.rng(b);
            (0..size).map(|_| sampler.sample(&mut rng)).collect()
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

/// Histogram of sampled photon counts with per-cell binomial errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    /// `counts[n][m]` for n ≤ nmax, m ≤ mmax.
    pub counts: Vec<Vec<u64>>,
    pub total: u64,
    /// Draws with n > nmax or m > mmax.
    pub overflow: u64,
    /// √(p̂(1 − p̂)/total) per cell.
    pub stderr_map: Vec<Vec<f64>>,
    pub nmax: usize,
    pub mmax: usize,
    /// Digest of the sampled state, comparable with the analytic one.
    pub params_digest: String,
}

impl EmpiricalDistribution {
    fn from_counts(counts: Vec<Vec<u64>>, overflow: u64, total: u64, params_digest: String) -> Self {
        let t = total as f64;
        let stderr_map = counts
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&c| {
                        let p = c as f64 / t;
                        (p * (1.0 - p) / t).sqrt()
                    })
                    .collect()
            })
            .collect();
        let nmax = counts.len() - 1;
        let mmax = counts[0].len() - 1;
        Self { counts, total, overflow, stderr_map, nmax, mmax, params_digest }
    }

    pub fn probability(&self, n: usize, m: usize) -> f64 {
        self.counts[n][m] as f64 / self.total as f64
    }

    /// ⟨NM⟩ / (⟨N⟩⟨M⟩) over the histogram.
    pub fn moment_g2(&self) -> f64 {
        let (mut a, mut b, mut ab) = (0.0, 0.0, 0.0);
        for (n, row) in self.counts.iter().enumerate() {
            for (m, &c) in row.iter().enumerate() {
                let c = c as f64;
                a += n as f64 * c;
                b += m as f64 * c;
                ab += (n * m) as f64 * c;
            }
        }
        let t = self.total as f64;
        (ab / t) / ((a / t) * (b / t))
    }
}

/// Poisson(I) that tolerates I = 0.
fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// Counts in the two arms behind a splitter of angle θ, histogrammed up to
/// (nmax, mmax).
pub fn sample_joint_pnr(
    state: &ModePairGaussian,
    theta: f64,
    cfg: &McConfig,
    nmax: usize,
    mmax: usize,
) -> Result<EmpiricalDistribution> {
    cfg.validate()?;
    let sampler = AmplitudeSampler::new(state)?;
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    let parts: Vec<(Vec<Vec<u64>>, u64)> = cfg
        .batches()
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = cfg.rng(b);
            let mut counts = vec![vec![0u64; mmax + 1]; nmax + 1];
            let mut overflow = 0;
            for _ in 0..size {
                let (a, be) = sampler.sample(&mut rng);
                let n = poisson(a.norm_sqr() * c2, &mut rng) as usize;
                let m = poisson(be.norm_sqr() * s2, &mut rng) as usize;
                if n <= nmax && m <= mmax {
                    counts[n][m] += 1;
                } else {
                    overflow += 1;
                }
            }
            (counts, overflow)
        })
        .collect();
    let mut counts = vec![vec![0u64; mmax + 1]; nmax + 1];
    let mut overflow = 0;
    for (c, o) in parts {
        for (row, add) in counts.iter_mut().zip(c) {
            for (x, y) in row.iter_mut().zip(add) {
                *x += y;
            }
        }
        overflow += o;
    }
    Ok(EmpiricalDistribution::from_counts(counts, overflow, cfg.sample_count, state_digest(state, theta, nmax, mmax)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// ⟨I1 I2⟩ / (⟨I1⟩⟨I2⟩) of the arm intensities, with a delete-one-batch
/// jackknife error.
pub fn estimate_g2_classical(state: &ModePairGaussian, theta: f64, cfg: &McConfig) -> Result<Estimate> {
    cfg.validate()?;
    let sampler = AmplitudeSampler::new(state)?;
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    let sums: Vec<[f64; 4]> = cfg
        .batches()
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = cfg.rng(b);
            let mut s = [0.0; 4];
            for _ in 0..size {
                let (a, be) = sampler.sample(&mut rng);
                let (i1, i2) = (a.norm_sqr() * c2, be.norm_sqr() * s2);
                s[0] += i1;
                s[1] += i2;
                s[2] += i1 * i2;
                s[3] += 1.0;
            }
            s
        })
        .collect();
    let total = sums.iter().fold([0.0; 4], |acc, s| [acc[0] + s[0], acc[1] + s[1], acc[2] + s[2], acc[3] + s[3]]);
    let ratio = |s: [f64; 4]| (s[2] / s[3]) / ((s[0] / s[3]) * (s[1] / s[3]));
    let value = ratio(total);
    let g = sums.len();
    if g < 2 {
        return Ok(Estimate { value, stderr: f64::NAN });
    }
    let leave: Vec<f64> =
        sums.iter().map(|s| ratio([total[0] - s[0], total[1] - s[1], total[2] - s[2], total[3] - s[3]])).collect();
    let mean = leave.iter().sum::<f64>() / g as f64;
    let var = (g as f64 - 1.0) / g as f64 * leave.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    Ok(Estimate { value, stderr: var.sqrt() })
}

/// Distance between an analytic distribution and a histogram over the same
/// cells, the analytic tail being compared with the histogram overflow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Agreement {
    pub tv_distance: f64,
    /// ½ Σ of the per-cell binomial standard errors.
    pub aggregate_stderr: f64,
    /// Fraction of cells with expected count ≥ 25 whose analytic value lies
    /// within three standard errors of the histogram.
    pub coverage: f64,
}

impl Agreement {
    pub fn passes(&self) -> bool {
        self.tv_distance < 3.0 * self.aggregate_stderr
    }
}

pub fn compare(analytic: &JointPnrDistribution, empirical: &EmpiricalDistribution) -> Result<Agreement> {
    if analytic.nmax != empirical.nmax || analytic.mmax != empirical.mmax {
        return Err(Error::InvalidParameter(format!(
            "shape mismatch: analytic {}x{}, empirical {}x{}",
            analytic.nmax, analytic.mmax, empirical.nmax, empirical.mmax
        )));
    }
    if analytic.params_digest != empirical.params_digest {
        return Err(Error::InvalidParameter(format!(
            "digest mismatch: analytic {}, empirical {}",
            analytic.params_digest, empirical.params_digest
        )));
    }
    let t = empirical.total as f64;
    let mut tv = 0.0;
    let mut agg = 0.0;
    let (mut checked, mut inside) = (0usize, 0usize);
    for n in 0..=analytic.nmax {
        for m in 0..=analytic.mmax {
            let p = analytic.get(n, m);
            let q = empirical.probability(n, m);
            tv += (p - q).abs();
            agg += empirical.stderr_map[n][m];
            if p * t >= 25.0 {
                checked += 1;
                // binomial interval from the analytic value, which is never 0 here
                if (p - q).abs() <= 3.0 * (p * (1.0 - p) / t).sqrt() {
                    inside += 1;
                }
            }
        }
    }
    tv += (analytic.tail_mass.max(0.0) - empirical.overflow as f64 / t).abs();
    let coverage = if checked == 0 { 1.0 } else { inside as f64 / checked as f64 };
    Ok(Agreement { tv_distance: 0.5 * tv, aggregate_stderr: 0.5 * agg, coverage })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batches_cover_sample_count() {
        let cfg = McConfig { sample_count: 25, seed: 1, batch: 10 };
        assert_eq!(cfg.batches(), vec![(0, 10), (1, 10), (2, 5)]);
    }

    #[test]
    fn theta_zero_leaves_arm_two_dark() {
        let st = ModePairGaussian::single_mode(0, Complex64::new(0.5, 0.0), 0.4).unwrap();
        let e = sample_joint_pnr(&st, 0.0, &McConfig::new(20_000, 3), 10, 3).unwrap();
        for row in &e.counts {
            assert!(row[1..].iter().all(|&c| c == 0));
        }
        assert_eq!(e.counts.iter().flatten().sum::<u64>() + e.overflow, e.total);
    }

    #[test]
    fn coincident_draws_coincide() {
        let st = ModePairGaussian::single_mode(2, Complex64::new(0.3, -0.2), 0.7).unwrap();
        let s = sample_amplitudes(&st, &McConfig::new(100, 9)).unwrap();
        for (a, b) in s {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_histogram() {
        let st = ModePairGaussian::single_mode(0, Complex64::new(0.5, 0.0), 0.4).unwrap();
        let cfg = McConfig { sample_count: 30_000, seed: 11, batch: 7_000 };
        let a = sample_joint_pnr(&st, 0.7, &cfg, 6, 6).unwrap();
        let b = sample_joint_pnr(&st, 0.7, &cfg, 6, 6).unwrap();
        assert_eq!(a, b);
    }
}
