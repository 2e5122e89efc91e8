use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::grid::{FieldFrame, GridSpec};
use super::screen::fft2;
use crate::error::{Error, Result};

/// Plaquette with nonzero phase winding. The plaquette spans pixels
/// (row, col) to (row + 1, col + 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Singularity {
    pub row: usize,
    pub col: usize,
    pub charge: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldMaps {
    pub grid: GridSpec,
    /// ⟨|E|²⟩ over all frames, row-major.
    pub mean_intensity: Vec<f64>,
    /// arg E of the first frame in (−π, π].
    pub phase: Vec<f64>,
    pub singularities: Vec<Singularity>,
}

impl FieldMaps {
    pub fn net_charge(&self) -> i32 {
        self.singularities.iter().map(|s| s.charge).sum()
    }
}

fn wrap(d: f64) -> f64 {
    let w = d.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Winding numbers of arg E around every pixel plaquette, counterclockwise
/// in (x, y).
pub fn phase_singularities(grid: &GridSpec, phase: &[f64]) -> Vec<Singularity> {
    let n = grid.n_pixels;
    let mut out = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            // rows run along +y, so this loop is counterclockwise
            let loop_ = [phase[i * n + j], phase[i * n + j + 1], phase[(i + 1) * n + j + 1], phase[(i + 1) * n + j]];
            let total: f64 = (0..4).map(|k| wrap(loop_[(k + 1) % 4] - loop_[k])).sum();
            let charge = (total / (2.0 * PI)).round() as i32;
            if charge != 0 {
                out.push(Singularity { row: i, col: j, charge });
            }
        }
    }
    out
}

pub fn intensity_phase_maps(frames: &[FieldFrame]) -> Result<FieldMaps> {
    let first = frames.first().ok_or_else(|| Error::InvalidParameter("no frames to map".into()))?;
    let grid = first.grid;
    let mut mean_intensity = vec![0.0; grid.len()];
    for f in frames {
        if f.grid != grid {
            return Err(Error::InvalidParameter("frames on different grids".into()));
        }
        for (m, v) in mean_intensity.iter_mut().zip(&f.values) {
            *m += v.norm_sqr();
        }
    }
    for m in &mut mean_intensity {
        *m /= frames.len() as f64;
    }
    let phase: Vec<f64> = first.values.iter().map(|v| v.arg()).collect();
    let singularities = phase_singularities(&grid, &phase);
    Ok(FieldMaps { grid, mean_intensity, phase, singularities })
}

/// Field in the back focal plane of a lens, E'(f) = ∫ E(x) e^{−2πi f·x} dA,
/// zero frequency centered. The output grid is in inverse waist units and
/// ∫|E'|² = ∫|E|².
pub fn far_field(frame: &FieldFrame) -> FieldFrame {
    let n = frame.grid.n_pixels;
    let da = frame.grid.pixel().powi(2);
    let mut data = frame.values.clone();
    fft2(&mut data, n, false);
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    let h = n / 2;
    for i in 0..n {
        for j in 0..n {
            values[((i + h) % n) * n + (j + h) % n] = data[i * n + j] * da;
        }
    }
    let grid = GridSpec { n_pixels: n, extent: n as f64 / frame.grid.extent };
    FieldFrame { grid, values, frame_id: frame.frame_id }
}
