//! Run profiles: one JSON file holding every parameter a subcommand needs.
//! Unknown keys are rejected, and each profile has a digest that tags all
//! outputs computed from it.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fit::{FitGrid, FitTargets};
use crate::fock::FockConfig;
use crate::montecarlo::McConfig;
use crate::source::{SlitGeometry, SourceParams};
use crate::synthesis::SynthesisConfig;

/// Inclusive OAM range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LRange {
    pub min: i64,
    pub max: i64,
}

impl LRange {
    pub fn new(min: i64, max: i64) -> Self {
        Self { min, max }
    }

    pub fn range(&self) -> std::ops::RangeInclusive<i64> {
        self.min..=self.max
    }
}

/// Photon-number and OAM cutoffs shared by the subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    /// Per-arm photon cap of joint distributions.
    pub photon_cap: usize,
    /// Mode pair of `jointpnr`, `montecarlo` and the photon-number maps.
    pub pair: [i64; 2],
    /// Range of both axes of the OAM maps.
    pub map_range: LRange,
    /// ℓ1 range of the interference scans.
    pub l1_range: LRange,
    /// Fixed ℓ2 of the interference scans.
    pub l2: i64,
    /// (n1, n2) projections of the interference scans and OAM maps.
    pub projections: Vec<[usize; 2]>,
    /// Largest n1, n2 of the photon-number maps.
    pub n_grid: usize,
    /// Photon numbers of the single-mode scan.
    pub first_order_photons: Vec<usize>,
    /// Largest |ℓ| of the synthesized statistics.
    pub synthesis_l_max: i64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            photon_cap: 20,
            pair: [0, 0],
            map_range: LRange::new(-5, 5),
            l1_range: LRange::new(-15, 15),
            l2: 3,
            projections: vec![[1, 1], [4, 4], [6, 5], [7, 7], [0, 1], [1, 4], [1, 7]],
            n_grid: 7,
            first_order_photons: vec![0, 4, 7],
            synthesis_l_max: 10,
        }
    }
}

impl Caps {
    pub fn validate(&self) -> Result<()> {
        if self.map_range.min > self.map_range.max || self.l1_range.min > self.l1_range.max {
            return Err(Error::Config("caps: empty ℓ range".into()));
        }
        if self.photon_cap == 0 || self.n_grid == 0 {
            return Err(Error::Config("caps: photon_cap and n_grid must be positive".into()));
        }
        if self.synthesis_l_max < 0 {
            return Err(Error::Config("caps: synthesis_l_max must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub grid: FitGrid,
    pub targets: FitTargets,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    /// Output directory; the `--out` flag takes precedence.
    pub directory: Option<String>,
    pub format: OutputFormat,
    pub svg: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunProfile {
    #[serde(default)]
    pub name: String,
    pub geometry: SlitGeometry,
    /// θ inside this section is the beam-splitter angle of every run.
    pub source: SourceParams,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub fock: FockConfig,
    #[serde(default)]
    pub mc: Option<McConfig>,
    #[serde(default)]
    pub synthesis: Option<SynthesisConfig>,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub outputs: Outputs,
}

impl RunProfile {
    /// The double slit at separation π/6 and width π/12 with the fitted
    /// source, 50:50 splitter.
    pub fn paper_fit() -> Self {
        let source = SourceParams::new(Complex64::new(1.0, 0.0), 0.9891346380153703, 48.0, 1.0)
            .expect("valid constants")
            .with_theta(PI / 4.0);
        Self {
            name: "paper_fit".into(),
            geometry: SlitGeometry::paper_double_slit(),
            source,
            caps: Caps::default(),
            fock: FockConfig::default(),
            mc: Some(McConfig::new(1_000_000, 2024)),
            synthesis: None,
            fit: FitSection::default(),
            outputs: Outputs::default(),
        }
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
        p.validate().map_err(|e| match e {
            Error::Config(m) | Error::InvalidParameter(m) => Error::Config(format!("{origin}: {m}")),
            other => other,
        })?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.source.validate()?;
        self.caps.validate()?;
        if let Some(mc) = &self.mc {
            mc.validate()?;
        }
        if let Some(s) = &self.synthesis {
            s.validate()?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    /// First 16 hex digits of SHA-256 over the compact JSON form. The output
    /// section is excluded, so the digest identifies the physics only.
    pub fn digest(&self) -> String {
        let mut copy = self.clone();
        copy.outputs = Outputs::default();
        let bytes = serde_json::to_vec(&copy).expect("profile serializes");
        let hash = Sha256::digest(&bytes);
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn require_mc(&self) -> Result<McConfig> {
        self.mc.ok_or_else(|| Error::Config("profile has no `mc` section, which montecarlo needs".into()))
    }

    pub fn require_synthesis(&self) -> Result<SynthesisConfig> {
        self.synthesis.ok_or_else(|| Error::Config("profile has no `synthesis` section, which synthesize needs".into()))
    }
}
