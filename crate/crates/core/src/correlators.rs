//! Classical and photon-number-resolved second-order correlations, and the
//! OAM / photon-number scans built from them.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{arm_marginal, joint_pnr_distribution_with, FockConfig, FockEvaluator};
use crate::source::{mode_pair_state, ModePairGaussian, SlitGeometry, SourceParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    ClassicalG2,
    MultiphotonG2,
    FirstOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub label: String,
    pub values: Vec<i64>,
}

impl Axis {
    pub fn new(label: &str, range: RangeInclusive<i64>) -> Self {
        Self { label: label.to_string(), values: range.collect() }
    }
}

/// Values on an (axis1 × axis2) grid; `values[i][j]` belongs to
/// (axis1[i], axis2[j]). One-dimensional scans use a single-entry axis2.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationMap {
    pub axis1: Axis,
    pub axis2: Axis,
    pub values: Vec<Vec<f64>>,
    pub kind: MapKind,
    pub meta: BTreeMap<String, String>,
}

impl CorrelationMap {
    /// The first column as a curve over axis1.
    pub fn curve(&self) -> Vec<f64> {
        self.values.iter().map(|r| r[0]).collect()
    }

    /// axis1 value of the largest entry of the first column (first on ties).
    pub fn argmax(&self) -> i64 {
        let c = self.curve();
        let mut best = 0;
        for (i, v) in c.iter().enumerate() {
            if *v > c[best] {
                best = i;
            }
        }
        self.axis1.values[best]
    }

    pub fn visibility(&self) -> f64 {
        visibility(&self.curve())
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }
}

/// (max − min)/(max + min) of a nonnegative curve.
pub fn visibility(curve: &[f64]) -> f64 {
    let max = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = curve.iter().copied().fold(f64::INFINITY, f64::min);
    (max - min) / (max + min)
}

/// 1 + [4|η|² + 4 Re(μ1* μ2 η)] / [(2σ1+|μ1|²)(2σ2+|μ2|²)].
pub fn g2_classical(state: &ModePairGaussian) -> f64 {
    let (n1, n2) = state.mean_photons();
    let num = 4.0 * state.eta.norm_sqr() + 4.0 * (state.mu1.conj() * state.mu2 * state.eta).re;
    1.0 + num / (n1 * n2)
}

/// Exact arm marginals for counts ≤ cap.
fn marginals(state: &ModePairGaussian, theta: f64, cap: usize, config: &FockConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((arm_marginal(state, theta, 1, cap, config)?, arm_marginal(state, theta, 2, cap, config)?))
}

fn ratio(joint: f64, p1: f64, p2: f64, n1: usize, n2: usize) -> Result<f64> {
    if p1 <= 0.0 || p2 <= 0.0 {
        return Err(Error::InvalidParameter(format!("arm marginal vanishes at ({n1},{n2})")));
    }
    Ok(joint / (p1 * p2))
}

/// g̃²(n1, n2) = P(n1, n2) / (P_arm1(n1) P_arm2(n2)).
pub fn g2_multiphoton(state: &ModePairGaussian, theta: f64, n1: usize, n2: usize, cap: usize) -> Result<f64> {
    g2_multiphoton_with(state, theta, n1, n2, cap, &FockConfig::default())
}

pub fn g2_multiphoton_with(
    state: &ModePairGaussian,
    theta: f64,
    n1: usize,
    n2: usize,
    cap: usize,
    config: &FockConfig,
) -> Result<f64> {
    let top = n1.max(n2);
    if top > cap {
        return Err(Error::PhotonCapExceeded { requested: top, cap });
    }
    let mut ev = FockEvaluator::new(state, theta, top, config)?;
    let joint = ev.element(n1, n2, n1, n2)?.re;
    let p1 = arm_marginal(state, theta, 1, n1, config)?[n1];
    let p2 = arm_marginal(state, theta, 2, n2, config)?[n2];
    ratio(joint, p1, p2, n1, n2)
}

/// g̃²(n1, n2) for all n1, n2 ≤ nmax at one mode pair.
pub fn scan_photon_pairs(state: &ModePairGaussian, theta: f64, nmax: usize) -> Result<CorrelationMap> {
    scan_photon_pairs_with(state, theta, nmax, &FockConfig::default())
}

pub fn scan_photon_pairs_with(
    state: &ModePairGaussian,
    theta: f64,
    nmax: usize,
    config: &FockConfig,
) -> Result<CorrelationMap> {
    let joint = joint_pnr_distribution_with(state, theta, nmax, nmax, config)?;
    let (p1, p2) = marginals(state, theta, nmax, config)?;
    let mut values = Vec::with_capacity(nmax + 1);
    for (n1, &q1) in p1.iter().enumerate() {
        let row = (0..=nmax).map(|n2| ratio(joint.get(n1, n2), q1, p2[n2], n1, n2)).collect::<Result<Vec<_>>>()?;
        values.push(row);
    }
    let mut meta = BTreeMap::new();
    meta.insert("l1".into(), state.l1.to_string());
    meta.insert("l2".into(), state.l2.to_string());
    meta.insert("theta".into(), theta.to_string());
    meta.insert("digest".into(), joint.params_digest.clone());
    Ok(CorrelationMap {
        axis1: Axis::new("n1", 0..=nmax as i64),
        axis2: Axis::new("n2", 0..=nmax as i64),
        values,
        kind: MapKind::MultiphotonG2,
        meta,
    })
}

fn scan_meta(params: &SourceParams, geom: &SlitGeometry) -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("mu0".into(), format!("{}", params.mu0));
    meta.insert("eta0".into(), params.eta0.to_string());
    meta.insert("lambda".into(), params.lambda_bw.to_string());
    meta.insert("zeta".into(), params.zeta.to_string());
    meta.insert("theta".into(), params.theta.to_string());
    meta.insert("width".into(), geom.width.to_string());
    meta.insert("separation".into(), geom.separation.to_string());
    meta
}

/// g² (no projection) or g̃²(n1, n2) of the pair (ℓ1, ℓ2_fixed) across ℓ1.
pub fn scan_interference(
    geom: &SlitGeometry,
    params: &SourceParams,
    l2_fixed: i64,
    l1_range: RangeInclusive<i64>,
    projection: Option<(usize, usize)>,
    cap: usize,
) -> Result<CorrelationMap> {
    scan_interference_with(geom, params, l2_fixed, l1_range, projection, cap, &FockConfig::default())
}

pub fn scan_interference_with(
    geom: &SlitGeometry,
    params: &SourceParams,
    l2_fixed: i64,
    l1_range: RangeInclusive<i64>,
    projection: Option<(usize, usize)>,
    cap: usize,
    config: &FockConfig,
) -> Result<CorrelationMap> {
    if l1_range.is_empty() {
        return Err(Error::InvalidParameter("empty ℓ1 range".into()));
    }
    let l1s: Vec<i64> = l1_range.clone().collect();
    let values = l1s
        .par_iter()
        .map(|&l1| {
            let st = mode_pair_state(l1, l2_fixed, geom, params)?;
            match projection {
                None => Ok(vec![g2_classical(&st)]),
                Some((n1, n2)) => Ok(vec![g2_multiphoton_with(&st, params.theta, n1, n2, cap, config)?]),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut meta = scan_meta(params, geom);
    meta.insert("l2".into(), l2_fixed.to_string());
    let (kind, axis2) = match projection {
        None => (MapKind::ClassicalG2, Axis { label: "g2".into(), values: vec![0] }),
        Some((n1, n2)) => {
            meta.insert("n1".into(), n1.to_string());
            meta.insert("n2".into(), n2.to_string());
            (MapKind::MultiphotonG2, Axis { label: "g2_tilde".into(), values: vec![0] })
        }
    };
    Ok(CorrelationMap { axis1: Axis::new("l1", l1_range), axis2, values, kind, meta })
}

/// Correlations over an (ℓ1, ℓ2) grid: g² when `projection` is `None`,
/// otherwise g̃²(n1, n2).
pub fn oam_map(
    geom: &SlitGeometry,
    params: &SourceParams,
    l_range: RangeInclusive<i64>,
    projection: Option<(usize, usize)>,
    config: &FockConfig,
) -> Result<CorrelationMap> {
    let ls: Vec<i64> = l_range.clone().collect();
    let cells: Vec<(i64, i64)> = ls.iter().flat_map(|&a| ls.iter().map(move |&b| (a, b))).collect();
    let flat = cells
        .par_iter()
        .map(|&(l1, l2)| {
            let st = mode_pair_state(l1, l2, geom, params)?;
            match projection {
                None => Ok(g2_classical(&st)),
                Some((n1, n2)) => g2_multiphoton_with(&st, params.theta, n1, n2, n1.max(n2), config),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let values = flat.chunks(ls.len()).map(|c| c.to_vec()).collect();
    let mut meta = scan_meta(params, geom);
    let kind = match projection {
        None => MapKind::ClassicalG2,
        Some((n1, n2)) => {
            meta.insert("n1".into(), n1.to_string());
            meta.insert("n2".into(), n2.to_string());
            MapKind::MultiphotonG2
        }
    };
    Ok(CorrelationMap { axis1: Axis::new("l1", l_range.clone()), axis2: Axis::new("l2", l_range), values, kind, meta })
}

/// Single-mode photon statistics across ℓ: mean photon number 2σ_ℓ + |μ_ℓ|²
/// and P(n) of the whole mode for each requested n.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstOrderScan {
    pub l: Vec<i64>,
    pub mean_photons: Vec<f64>,
    /// `probs` axis1 = ℓ, axis2 = photon number.
    pub probs: CorrelationMap,
}

impl FirstOrderScan {
    /// Visibility of the P(n) curve for the `idx`-th requested photon number.
    pub fn contrast(&self, idx: usize) -> f64 {
        let c: Vec<f64> = self.probs.values.iter().map(|r| r[idx]).collect();
        visibility(&c)
    }
}

pub fn first_order_scan(
    geom: &SlitGeometry,
    params: &SourceParams,
    l1_range: RangeInclusive<i64>,
    photon_numbers: &[usize],
) -> Result<FirstOrderScan> {
    if l1_range.is_empty() || photon_numbers.is_empty() {
        return Err(Error::InvalidParameter("empty scan".into()));
    }
    let ls: Vec<i64> = l1_range.clone().collect();
    let top = *photon_numbers.iter().max().expect("nonempty");
    let config = FockConfig::default();
    let rows = ls
        .par_iter()
        .map(|&l| {
            let st = mode_pair_state(l, l, geom, params)?;
            let p = arm_marginal(&st, 0.0, 1, top, &config)?;
            Ok((st.mean_photons().0, photon_numbers.iter().map(|&n| p[n]).collect::<Vec<_>>()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean_photons, values): (Vec<f64>, Vec<Vec<f64>>) = rows.into_iter().unzip();
    Ok(FirstOrderScan {
        l: ls,
        mean_photons,
        probs: CorrelationMap {
            axis1: Axis::new("l", l1_range),
            axis2: Axis { label: "n".into(), values: photon_numbers.iter().map(|&n| n as i64).collect() },
            values,
            kind: MapKind::FirstOrder,
            meta: scan_meta(params, geom),
        },
    })
}
