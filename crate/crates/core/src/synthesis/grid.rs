use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square sampling grid centered on the optical axis. Pixel centers sit at
/// half-integer offsets, so the axis falls on a plaquette center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_pixels: usize,
    /// Side length in beam-waist units.
    pub extent: f64,
}

impl GridSpec {
    pub fn new(n_pixels: usize, extent: f64) -> Result<Self> {
        let g = Self { n_pixels, extent };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pixels < 4 || !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid needs n_pixels >= 4 and a positive extent, got {} and {}",
                self.n_pixels, self.extent
            )));
        }
        Ok(())
    }

    /// Power-of-two side of at least 256 pixels spanning ≥ 8 waists.
    pub fn is_acceptance_grade(&self, w0: f64) -> bool {
        self.n_pixels.is_power_of_two() && self.n_pixels >= 256 && self.extent >= 8.0 * w0
    }

    pub fn pixel(&self) -> f64 {
        self.extent / self.n_pixels as f64
    }

    pub fn len(&self) -> usize {
        self.n_pixels * self.n_pixels
    }

    pub fn is_empty(&self) -> bool {
        self.n_pixels == 0
    }

    /// Coordinate of pixel center `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - 0.5 * self.n_pixels as f64 + 0.5) * self.pixel()
    }

    /// (x, y) of the pixel at row `i`, column `j`; rows run along y.
    pub fn xy(&self, i: usize, j: usize) -> (f64, f64) {
        (self.coord(j), self.coord(i))
    }
}

/// One random realization of the transverse field, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFrame {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    pub frame_id: u64,
}

impl FieldFrame {
    /// ∫|E|² dA.
    pub fn energy(&self) -> f64 {
        let da = self.grid.pixel().powi(2);
        crate::numeric::neumaier_sum(self.values.iter().map(|v| v.norm_sqr())) * da
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}
