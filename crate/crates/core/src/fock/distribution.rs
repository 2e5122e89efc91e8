use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::element::{FockConfig, FockEvaluator};
use crate::error::{Error, Result};
use crate::source::ModePairGaussian;

/// Clamp threshold for negative round-off in probabilities.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// P(N, M) for N ≤ nmax, M ≤ mmax.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointPnrDistribution {
    /// Row-major, `probs[n][m]`.
    pub probs: Vec<Vec<f64>>,
    pub nmax: usize,
    pub mmax: usize,
    /// 1 − Σ P(N, M).
    pub tail_mass: f64,
    pub params_digest: String,
    /// Cells whose slightly negative round-off was clamped to zero.
    pub clamped_cells: usize,
    /// Cells evaluated on the double-double path.
    pub extended_cells: usize,
}

impl JointPnrDistribution {
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.probs[n][m]
    }

    pub fn total(&self) -> f64 {
        crate::numeric::neumaier_sum(self.probs.iter().flatten().copied())
    }

    /// Truncated row sums Σ_M P(N, M).
    pub fn arm1_sums(&self) -> Vec<f64> {
        self.probs.iter().map(|r| crate::numeric::neumaier_sum(r.iter().copied())).collect()
    }

    /// Truncated column sums Σ_N P(N, M).
    pub fn arm2_sums(&self) -> Vec<f64> {
        (0..=self.mmax).map(|m| crate::numeric::neumaier_sum(self.probs.iter().map(|r| r[m]))).collect()
    }

    /// ⟨N⟩ and ⟨M⟩ over the stored cells.
    pub fn mean_counts(&self) -> (f64, f64) {
        let a = self.arm1_sums().iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        let b = self.arm2_sums().iter().enumerate().map(|(m, p)| m as f64 * p).sum();
        (a, b)
    }

    /// ⟨NM⟩ / (⟨N⟩⟨M⟩) over the stored cells.
    pub fn moment_g2(&self) -> f64 {
        let mut nm = 0.0;
        for (n, row) in self.probs.iter().enumerate() {
            for (m, p) in row.iter().enumerate() {
                nm += (n * m) as f64 * p;
            }
        }
        let (a, b) = self.mean_counts();
        nm / (a * b)
    }

    pub fn check_tail(&self, tolerance: f64) -> Result<()> {
        if self.tail_mass > tolerance {
            return Err(Error::TailToleranceExceeded { tail: self.tail_mass, tolerance });
        }
        Ok(())
    }
}

/// Short hex digest of the quantities that determine a distribution.
pub fn state_digest(state: &ModePairGaussian, theta: f64, nmax: usize, mmax: usize) -> String {
    let mut h = Sha256::new();
    for x in [
        state.mu1.re,
        state.mu1.im,
        state.mu2.re,
        state.mu2.im,
        state.sigma1,
        state.sigma2,
        state.eta.re,
        state.eta.im,
        theta,
    ] {
        h.update(x.to_le_bytes());
    }
    h.update((state.l1).to_le_bytes());
    h.update((state.l2).to_le_bytes());
    h.update((nmax as u64).to_le_bytes());
    h.update((mmax as u64).to_le_bytes());
    let out = h.finalize();
    out[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn clamp(p: f64, counter: &mut usize) -> f64 {
    if p < 0.0 {
        if p < -NEGATIVE_TOLERANCE {
            log::warn!("probability {p:e} below the negative round-off tolerance");
        }
        *counter += 1;
        0.0
    } else {
        p
    }
}

/// Exact single-arm photon-number law P_arm(n), n ≤ nmax, of arm 1 (`arm = 1`)
/// or arm 2 (`arm = 2`), summed over all counts of the other arm.
pub fn arm_marginal(
    state: &ModePairGaussian,
    theta: f64,
    arm: u8,
    nmax: usize,
    config: &FockConfig,
) -> Result<Vec<f64>> {
    let (t1, t2) = match arm {
        1 => (theta.cos(), 0.0),
        2 => (0.0, theta.sin()),
        _ => return Err(Error::InvalidParameter(format!("arm must be 1 or 2, got {arm}"))),
    };
    let mut ev = FockEvaluator::for_transmissions(state, t1, t2, nmax, config)?;
    let mut clamped = 0;
    (0..=nmax)
        .map(|n| {
            let e = if arm == 1 { ev.element(n, 0, n, 0)? } else { ev.element(0, n, 0, n)? };
            Ok(clamp(e.re, &mut clamped))
        })
        .collect()
}

pub fn joint_pnr_distribution(
    state: &ModePairGaussian,
    theta: f64,
    nmax: usize,
    mmax: usize,
) -> Result<JointPnrDistribution> {
    joint_pnr_distribution_with(state, theta, nmax, mmax, &FockConfig::default())
}

/// Joint distribution with an explicit configuration. Rows are evaluated in
/// parallel, each rayon job with its own evaluation context; every element
/// follows the same arithmetic path regardless of the split, so the result
/// does not depend on the number of workers.
pub fn joint_pnr_distribution_with(
    state: &ModePairGaussian,
    theta: f64,
    nmax: usize,
    mmax: usize,
    config: &FockConfig,
) -> Result<JointPnrDistribution> {
    let cap = nmax.max(mmax);
    if cap > config.photon_cap_max {
        return Err(Error::PhotonCapExceeded { requested: cap, cap: config.photon_cap_max });
    }
    let digest = state_digest(state, theta, nmax, mmax);
    let mut clamped = 0;
    let (probs, extended) = if config.factorized_fast_path && !state.coincident && state.is_factorized() {
        let s1 = ModePairGaussian::single_mode(state.l1, state.mu1, state.sigma1)?;
        let s2 = ModePairGaussian::single_mode(state.l2, state.mu2, state.sigma2)?;
        let p1 = arm_marginal(&s1, theta, 1, nmax, config)?;
        let p2 = arm_marginal(&s2, theta, 2, mmax, config)?;
        let probs = p1.iter().map(|a| p2.iter().map(|b| a * b).collect()).collect();
        (probs, 0)
    } else {
        let base = FockEvaluator::new(state, theta, cap, config)?;
        let rows: Vec<Result<(Vec<f64>, usize)>> = (0..=nmax)
            .into_par_iter()
            .map_init(
                || base.clone(),
                |ev, n| {
                    let before = ev.extended_evaluations();
                    let row = (0..=mmax).map(|m| ev.element(n, m, n, m).map(|e| e.re)).collect::<Result<Vec<_>>>()?;
                    Ok((row, ev.extended_evaluations() - before))
                },
            )
            .collect();
        let mut probs = Vec::with_capacity(nmax + 1);
        let mut extended = 0;
        for r in rows {
            let (row, ext) = r?;
            probs.push(row);
            extended += ext;
        }
        (probs, extended)
    };
    let probs: Vec<Vec<f64>> =
        probs.into_iter().map(|row: Vec<f64>| row.into_iter().map(|p| clamp(p, &mut clamped)).collect()).collect();
    let total = crate::numeric::neumaier_sum(probs.iter().flatten().copied());
    Ok(JointPnrDistribution {
        probs,
        nmax,
        mmax,
        tail_mass: (1.0 - total).max(0.0),
        params_digest: digest,
        clamped_cells: clamped,
        extended_cells: extended,
    })
}
