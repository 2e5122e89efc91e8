//! Random optical field synthesized from Kolmogorov phase screens, projected
//! numerically onto OAM modes behind the angular slits.

mod grid;
mod maps;
mod modes;
mod screen;
mod stats;

pub use grid::{FieldFrame, GridSpec};
pub use maps::{far_field, intensity_phase_maps, phase_singularities, FieldMaps, Singularity};
pub use modes::{
    inner, laguerre, lg_mode, lg_value, oam_power_spectrum, project_onto_oam, OamProjector, RadialBasis, DEFAULT_P_MAX,
};
pub use screen::{kolmogorov_psd, kolmogorov_screen, kolmogorov_screen_stream, log_log_slope, structure_function};
pub use stats::{
    empirical_statistics, fit_spectrum, mode_samples, spiral_bandwidth, statistics_from_samples, ModeStatistics,
    SpectrumFit, MIN_FRAMES,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian beam LG_0^0 times e^{iΦ}, optionally mixed with an unmodulated
/// copy: E = LG_0^0 · [(1 − b) e^{iΦ} + b].
pub fn synthesize_frame(
    grid: &GridSpec,
    w0: f64,
    screen: &[f64],
    coherent_bias: f64,
    frame_id: u64,
) -> Result<FieldFrame> {
    grid.validate()?;
    if screen.len() != grid.len() {
        return Err(Error::InvalidParameter(format!("screen has {} pixels, grid {}", screen.len(), grid.len())));
    }
    if !(0.0..=1.0).contains(&coherent_bias) {
        return Err(Error::InvalidParameter(format!("coherent bias must lie in [0, 1], got {coherent_bias}")));
    }
    let gauss = lg_mode(0, 0, grid, w0)?;
    let values = gauss
        .iter()
        .zip(screen)
        .map(|(g, phi)| g * (Complex64::from_polar(1.0 - coherent_bias, *phi) + coherent_bias))
        .collect();
    Ok(FieldFrame { grid: *grid, values, frame_id })
}

/// Everything needed to regenerate a frame ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisConfig {
    pub grid: GridSpec,
    /// Beam waist in grid length units.
    pub w0: f64,
    /// Fried parameter in grid length units.
    pub r0: f64,
    pub frames: usize,
    #[serde(default)]
    pub coherent_bias: f64,
    #[serde(default)]
    pub basis: RadialBasis,
    pub seed: u64,
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.w0 > 0.0 && self.r0 > 0.0) {
            return Err(Error::InvalidParameter("w0 and r0 must be positive".into()));
        }
        if self.frames == 0 {
            return Err(Error::InvalidParameter("frames must be positive".into()));
        }
        self.basis.validate()
    }

    /// Frame `k`: screen stream `k` of the configured seed.
    pub fn frame(&self, k: u64) -> Result<FieldFrame> {
        let screen = kolmogorov_screen_stream(&self.grid, self.r0, self.seed, k)?;
        synthesize_frame(&self.grid, self.w0, &screen, self.coherent_bias, k)
    }

    pub fn frames(&self) -> Result<Vec<FieldFrame>> {
        self.validate()?;
        (0..self.frames as u64).into_par_iter().map(|k| self.frame(k)).collect()
    }
}
