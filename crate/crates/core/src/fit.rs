//! Coarse parameter sweep that pins (μ0, η0, λ, ζ) to the published anchors:
//! g²(0,0), the peak of the classical ℓ1 scan, the peak of an enhanced
//! (g̃² > 1) projection and the peak of a coalescent (g̃² < 1) projection.
//!
//! η0 is not gridded. For fixed (μ0, λ, ζ) the covariance is linear in η0
//! and g²(0,0) = 2 − r²/(1+r)² with r = |μ_0|²/(2σ_0), so the anchor fixes
//! η0 in closed form and the grid runs over the remaining three.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlators::{first_order_scan, g2_classical, oam_map, scan_interference, scan_photon_pairs};
use crate::error::{Error, Result};
use crate::fock::{joint_pnr_distribution, FockConfig};
use crate::source::{covariance, mean_amplitude, mode_pair_state, SlitGeometry, SourceParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitTargets {
    /// g²(0,0) of the unprojected source.
    pub g2_00: f64,
    pub l2: i64,
    pub l1_min: i64,
    pub l1_max: i64,
    /// Peak of the classical scan and of the enhanced projections.
    pub correlated_peak: i64,
    /// Peak of the coalescent projections.
    pub anticorrelated_peak: i64,
    /// Projections (n1, n2) with n1, n2 ≤ this are searched.
    pub projection_nmax: usize,
    /// Also score the OAM-map and single-mode structure checks.
    pub structure: bool,
    pub map_half_width: i64,
    /// Upper bound on the (0,0) tail mass beyond `tail_cap` photons per arm.
    pub tail_tolerance: f64,
    pub tail_cap: usize,
}

impl Default for FitTargets {
    fn default() -> Self {
        Self {
            g2_00: 1.74,
            l2: 3,
            l1_min: -15,
            l1_max: 15,
            correlated_peak: 3,
            anticorrelated_peak: -3,
            projection_nmax: 6,
            structure: true,
            map_half_width: 5,
            tail_tolerance: 1e-6,
            tail_cap: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitGrid {
    pub mu0: Vec<f64>,
    pub lambda_bw: Vec<f64>,
    pub zeta: Vec<f64>,
}

impl Default for FitGrid {
    fn default() -> Self {
        Self { mu0: vec![0.8, 1.0, 1.2], lambda_bw: vec![16.0, 32.0, 48.0, 64.0, 96.0], zeta: vec![0.9, 1.0] }
    }
}

/// A projection together with the peak and visibility of its ℓ1 scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionPeak {
    pub n1: usize,
    pub n2: usize,
    /// g̃²(n1, n2) at ℓ1 = ℓ2 = 0, which decides the class.
    pub g2_tilde_00: f64,
    pub argmax: i64,
    pub visibility: f64,
    /// Curve value at the peak minus the largest value elsewhere.
    pub margin: f64,
}

/// Qualitative checks on the OAM maps and on single-mode photon statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub peak_44: f64,
    pub peak_77: f64,
    pub peak_44_on_diagonal: bool,
    pub peak_77_on_diagonal: bool,
    pub max_diagonal_14: f64,
    pub max_diagonal_17: f64,
    pub p0_dip_at_zero: bool,
    pub contrast_p4: f64,
    pub contrast_p7: f64,
}

impl StructureReport {
    pub fn failures(&self) -> usize {
        [
            self.peak_44_on_diagonal,
            self.peak_77_on_diagonal,
            self.peak_77 > self.peak_44,
            self.max_diagonal_14 < 1.0,
            self.max_diagonal_17 < 1.0,
            self.p0_dip_at_zero,
            self.contrast_p7 > self.contrast_p4,
        ]
        .iter()
        .filter(|ok| !**ok)
        .count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitPoint {
    pub params: SourceParams,
    pub g2_00: f64,
    pub tail_mass_00: f64,
    pub classical_argmax: i64,
    pub classical_visibility: f64,
    pub enhanced: Option<ProjectionPeak>,
    pub coalescent: Option<ProjectionPeak>,
    pub structure: Option<StructureReport>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub targets: FitTargets,
    pub best: FitPoint,
    pub evaluated: Vec<FitPoint>,
}

/// η0 that puts g²(0,0) at `target` for the given (μ0, λ, ζ).
pub fn solve_eta0(geom: &SlitGeometry, mu0: Complex64, lambda_bw: f64, zeta: f64, target: f64) -> Result<f64> {
    if !(target > 1.0 && target < 2.0) {
        return Err(Error::InvalidParameter(format!("g2 anchor {target} outside (1, 2)")));
    }
    let unit = SourceParams::new(mu0, 1.0, lambda_bw, zeta)?;
    let m0 = mean_amplitude(0, geom, &unit).norm_sqr();
    if m0 == 0.0 {
        return Err(Error::InvalidParameter("μ_0 vanishes; g²(0,0) is 2 for every η0".into()));
    }
    let s0 = covariance(0, 0, geom, &unit).re;
    let q = (2.0 - target).sqrt();
    let r = q / (1.0 - q);
    Ok(m0 / (2.0 * r * s0))
}

fn peak_margin(curve: &[f64], idx: usize) -> f64 {
    let other = curve.iter().enumerate().filter(|(i, _)| *i != idx).map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    curve[idx] - other
}

/// Peaks of every projection scan with n1, n2 ≤ nmax, in (n1, n2) order.
pub fn projection_peaks(
    geom: &SlitGeometry,
    params: &SourceParams,
    targets: &FitTargets,
) -> Result<Vec<ProjectionPeak>> {
    let nmax = targets.projection_nmax;
    let origin = mode_pair_state(0, 0, geom, params)?;
    let pairs = scan_photon_pairs(&origin, params.theta, nmax)?;
    let mut out = Vec::new();
    for n1 in 0..=nmax {
        for n2 in 0..=nmax {
            let scan =
                scan_interference(geom, params, targets.l2, targets.l1_min..=targets.l1_max, Some((n1, n2)), nmax)?;
            let curve = scan.curve();
            let argmax = scan.argmax();
            let idx = (argmax - targets.l1_min) as usize;
            out.push(ProjectionPeak {
                n1,
                n2,
                g2_tilde_00: pairs.values[n1][n2],
                argmax,
                visibility: scan.visibility(),
                margin: peak_margin(&curve, idx),
            });
        }
    }
    Ok(out)
}

/// Diagonal peaks of the (4,4) and (7,7) maps, diagonal troughs of the
/// (1,4) and (1,7) maps, and the single-mode P(0) dip and P(7)/P(4) contrast.
pub fn structure_report(geom: &SlitGeometry, params: &SourceParams, half_width: i64) -> Result<StructureReport> {
    let cfg = FockConfig::default();
    let range = -half_width..=half_width;
    let peak = |pair: (usize, usize)| -> Result<(f64, bool)> {
        let map = oam_map(geom, params, range.clone(), Some(pair), &cfg)?;
        let max = map.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        let diag = (0..map.values.len()).map(|i| map.values[i][i]).fold(f64::NEG_INFINITY, f64::max);
        Ok((max, diag == max))
    };
    let (peak_44, peak_44_on_diagonal) = peak((4, 4))?;
    let (peak_77, peak_77_on_diagonal) = peak((7, 7))?;
    let diagonal_max = |pair: (usize, usize)| -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for l in range.clone() {
            let st = mode_pair_state(l, l, geom, params)?;
            best = best.max(crate::correlators::g2_multiphoton(&st, params.theta, pair.0, pair.1, 7)?);
        }
        Ok(best)
    };
    let max_diagonal_14 = diagonal_max((1, 4))?;
    let max_diagonal_17 = diagonal_max((1, 7))?;
    let scan = first_order_scan(geom, params, -12..=12, &[0, 4, 7])?;
    let p0: Vec<f64> = scan.probs.values.iter().map(|r| r[0]).collect();
    let c = 12;
    Ok(StructureReport {
        peak_44,
        peak_77,
        peak_44_on_diagonal,
        peak_77_on_diagonal,
        max_diagonal_14,
        max_diagonal_17,
        p0_dip_at_zero: p0[c] < p0[c - 1] && p0[c] < p0[c + 1],
        contrast_p4: scan.contrast(1),
        contrast_p7: scan.contrast(2),
    })
}

fn sq(x: i64) -> f64 {
    (x * x) as f64
}

/// Residual contribution of a peak class; a missing class costs a full
/// window width.
fn class_residual(peak: &Option<ProjectionPeak>, target: i64, window: i64) -> f64 {
    match peak {
        Some(p) => sq(p.argmax - target),
        None => sq(window),
    }
}

/// Best member of a class: closest peak, then largest margin.
fn pick(candidates: impl Iterator<Item = ProjectionPeak>, target: i64) -> Option<ProjectionPeak> {
    candidates
        .min_by(|a, b| (a.argmax - target).abs().cmp(&(b.argmax - target).abs()).then(b.margin.total_cmp(&a.margin)))
}

pub fn evaluate_point(geom: &SlitGeometry, params: &SourceParams, targets: &FitTargets) -> Result<FitPoint> {
    let origin = mode_pair_state(0, 0, geom, params)?;
    let g2_00 = g2_classical(&origin);
    let tail_mass_00 = joint_pnr_distribution(&origin, params.theta, targets.tail_cap, targets.tail_cap)?.tail_mass;
    let classical = scan_interference(geom, params, targets.l2, targets.l1_min..=targets.l1_max, None, 0)?;
    let classical_visibility = classical.visibility();
    let peaks = projection_peaks(geom, params, targets)?;
    let enhanced = pick(
        peaks.iter().filter(|p| p.g2_tilde_00 > 1.0 && p.visibility >= classical_visibility).cloned(),
        targets.correlated_peak,
    );
    let coalescent = pick(peaks.iter().filter(|p| p.g2_tilde_00 < 1.0).cloned(), targets.anticorrelated_peak);
    let window = targets.l1_max - targets.l1_min;
    let mut residual = (g2_00 - targets.g2_00).powi(2)
        + sq(classical.argmax() - targets.correlated_peak)
        + class_residual(&enhanced, targets.correlated_peak, window)
        + class_residual(&coalescent, targets.anticorrelated_peak, window)
        + if tail_mass_00 > targets.tail_tolerance { 1.0 } else { 0.0 };
    let mut structure = None;
    if targets.structure && residual < 1e-6 {
        let report = structure_report(geom, params, targets.map_half_width)?;
        residual += report.failures() as f64;
        structure = Some(report);
    }
    Ok(FitPoint {
        params: *params,
        g2_00,
        tail_mass_00,
        classical_argmax: classical.argmax(),
        classical_visibility,
        enhanced,
        coalescent,
        structure,
        residual,
    })
}

/// Sweeps the grid in (μ0, λ, ζ) order; the best point has the smallest
/// residual, ties going to the larger coalescent peak margin.
pub fn fit(geom: &SlitGeometry, grid: &FitGrid, targets: &FitTargets, theta: f64) -> Result<FitReport> {
    if grid.mu0.is_empty() || grid.lambda_bw.is_empty() || grid.zeta.is_empty() {
        return Err(Error::InvalidParameter("empty fit grid".into()));
    }
    let nodes: Vec<(f64, f64, f64)> = grid
        .mu0
        .iter()
        .flat_map(|&m| grid.lambda_bw.iter().flat_map(move |&l| grid.zeta.iter().map(move |&z| (m, l, z))))
        .collect();
    let evaluated = nodes
        .par_iter()
        .map(|&(mu0, lambda_bw, zeta)| {
            let mu0 = Complex64::new(mu0, 0.0);
            let eta0 = solve_eta0(geom, mu0, lambda_bw, zeta, targets.g2_00)?;
            let params = SourceParams::new(mu0, eta0, lambda_bw, zeta)?.with_theta(theta);
            let point = evaluate_point(geom, &params, targets)?;
            log::info!(
                "fit mu0={} lambda={} zeta={} eta0={:.4}: residual {:.3e}",
                mu0.re,
                lambda_bw,
                zeta,
                eta0,
                point.residual
            );
            Ok(point)
        })
        .collect::<Result<Vec<_>>>()?;
    let margin = |p: &FitPoint| p.coalescent.as_ref().map_or(f64::NEG_INFINITY, |c| c.margin);
    let best = evaluated
        .iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual).then(margin(b).total_cmp(&margin(a))))
        .expect("nonempty grid")
        .clone();
    Ok(FitReport { targets: targets.clone(), best, evaluated })
}
