//! Two-mode complex-Gaussian source behind an angular slit mask.
//!
//! Absolute scales are folded into `mu0` (mean amplitude of the ℓ = 0 mode)
//! and `eta0` (variance of the ℓ = 0 mode in the flat-spectrum limit); only
//! ratios of these enter the classical correlation function, while the
//! photon-number statistics depend on their absolute size.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI, TAU};

use crate::error::{Error, Result};
use crate::numeric::{sinc, CompensatedSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlitKind {
    Single,
    Double,
}

/// Angular aperture S(φ): one slit of full width `width` centered at 0 and,
/// for [`SlitKind::Double`], a second one centered at `separation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlitGeometry {
    pub width: f64,
    pub separation: f64,
    pub kind: SlitKind,
}

impl SlitGeometry {
    pub fn double(width: f64, separation: f64) -> Result<Self> {
        let g = Self { width, separation, kind: SlitKind::Double };
        g.validate()?;
        Ok(g)
    }

    pub fn single(width: f64) -> Result<Self> {
        let g = Self { width, separation: 0.0, kind: SlitKind::Single };
        g.validate()?;
        Ok(g)
    }

    /// Slits of width π/12 separated by π/6.
    pub fn paper_double_slit() -> Self {
        Self { width: PI / 12.0, separation: PI / 6.0, kind: SlitKind::Double }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width < TAU) {
            return Err(Error::InvalidParameter(format!("slit width {} outside (0, 2π)", self.width)));
        }
        if !(self.separation >= 0.0 && self.separation < TAU) {
            return Err(Error::InvalidParameter(format!("slit separation {} outside [0, 2π)", self.separation)));
        }
        if self.kind == SlitKind::Double && self.separation < self.width {
            return Err(Error::InvalidParameter(format!(
                "double slit overlaps: separation {} < width {}",
                self.separation, self.width
            )));
        }
        Ok(())
    }
}

fn wrap_angle(phi: f64) -> f64 {
    let mut x = (phi + PI).rem_euclid(TAU) - PI;
    if x >= PI {
        x -= TAU;
    }
    x
}

/// S(φ) ∈ {0, 1}; boundary points count as inside.
pub fn slit_transmission(phi: f64, geom: &SlitGeometry) -> f64 {
    let half = 0.5 * geom.width + 1e-12;
    if wrap_angle(phi).abs() <= half {
        return 1.0;
    }
    if geom.kind == SlitKind::Double && wrap_angle(phi - geom.separation).abs() <= half {
        return 1.0;
    }
    0.0
}

fn default_theta() -> f64 {
    FRAC_PI_4
}
fn default_tail_eps() -> f64 {
    1e-12
}
fn default_deg_eps() -> f64 {
    1e-14
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceParams {
    /// Complex mean amplitude scale.
    pub mu0: Complex64,
    /// Covariance scale, > 0.
    pub eta0: f64,
    /// Spiral bandwidth λ in C_ℓ = exp(−ℓ²/λ).
    pub lambda_bw: f64,
    /// Flat coherent-background correction in [0, 1].
    pub zeta: f64,
    /// Beam-splitter angle (π/4 is 50:50).
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Tail tolerance for the truncated ℓ-sum.
    #[serde(default = "default_tail_eps")]
    pub covariance_tail_eps: f64,
    /// Relative threshold on σ1σ2 − |η|² below which a pair is degenerate.
    #[serde(default = "default_deg_eps")]
    pub degeneracy_eps: f64,
}

impl SourceParams {
    pub fn new(mu0: Complex64, eta0: f64, lambda_bw: f64, zeta: f64) -> Result<Self> {
        let p = Self {
            mu0,
            eta0,
            lambda_bw,
            zeta,
            theta: default_theta(),
            covariance_tail_eps: default_tail_eps(),
            degeneracy_eps: default_deg_eps(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta0 > 0.0) {
            return Err(Error::InvalidParameter(format!("eta0 must be > 0, got {}", self.eta0)));
        }
        if !(self.lambda_bw > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda_bw must be > 0, got {}", self.lambda_bw)));
        }
        if !(0.0..=1.0).contains(&self.zeta) {
            return Err(Error::InvalidParameter(format!("zeta must lie in [0, 1], got {}", self.zeta)));
        }
        if !self.theta.is_finite() || !self.mu0.re.is_finite() || !self.mu0.im.is_finite() {
            return Err(Error::InvalidParameter("non-finite theta or mu0".into()));
        }
        if !(self.covariance_tail_eps > 0.0 && self.covariance_tail_eps < 1.0) {
            return Err(Error::InvalidParameter("covariance_tail_eps must lie in (0, 1)".into()));
        }
        if !(self.degeneracy_eps >= 0.0) {
            return Err(Error::InvalidParameter("degeneracy_eps must be >= 0".into()));
        }
        Ok(())
    }

    /// Truncation |ℓ| ≤ L_cut of the spectral sum.
    pub fn l_cut(&self) -> i64 {
        (self.lambda_bw * (1.0 / self.covariance_tail_eps).ln()).sqrt().ceil() as i64
    }

    /// C_ℓ = exp(−ℓ²/λ).
    pub fn spectral_weight(&self, l: i64) -> f64 {
        (-((l * l) as f64) / self.lambda_bw).exp()
    }
}

/// Mean amplitude μ_ℓ of the projected mode.
pub fn mean_amplitude(l: i64, geom: &SlitGeometry, params: &SourceParams) -> Complex64 {
    let l = l as f64;
    let envelope = sinc(geom.width * l / 2.0);
    let shaped = match geom.kind {
        SlitKind::Single => Complex64::new(envelope, 0.0),
        SlitKind::Double => {
            let half = geom.separation * l / 2.0;
            Complex64::from_polar(1.0, -half) * (half.cos() * envelope)
        }
    };
    params.mu0 * (shaped * (1.0 - params.zeta) + params.zeta)
}

/// Angular kernel of one slit structure at OAM offset d, up to the common phase.
fn angular_kernel(d: i64, geom: &SlitGeometry) -> f64 {
    let d = d.unsigned_abs() as f64;
    let env = sinc(geom.width * d / 2.0);
    match geom.kind {
        SlitKind::Single => env,
        SlitKind::Double => (geom.separation * d / 2.0).cos() * env,
    }
}

/// Cross-covariance η_{ℓ1,ℓ2} from the truncated spectral sum with
/// C_ℓ = exp(−ℓ²/λ). Normalized so that a flat spectrum gives η_{ℓ,ℓ} = η0.
pub fn covariance(l1: i64, l2: i64, geom: &SlitGeometry, params: &SourceParams) -> Complex64 {
    let cut = params.l_cut();
    let mut acc = CompensatedSum::<f64>::new();
    for l in -cut..=cut {
        let t = params.spectral_weight(l) * (angular_kernel(l1 - l, geom) * angular_kernel(l - l2, geom));
        acc.add(t, t.abs());
    }
    let (norm, phase) = match geom.kind {
        SlitKind::Single => (geom.width / TAU, Complex64::new(1.0, 0.0)),
        SlitKind::Double => (geom.width / PI, Complex64::from_polar(1.0, -geom.separation * (l1 - l2) as f64 / 2.0)),
    };
    phase * (params.eta0 * norm * acc.value())
}

/// Large-bandwidth approximation of [`covariance`]:
/// η0 e^{−iφ0Δ/2} cos(φ0Δ/2) sinc(wΔ/2) e^{−(ℓ1+ℓ2)²/4λ}.
pub fn covariance_large_bandwidth(l1: i64, l2: i64, geom: &SlitGeometry, params: &SourceParams) -> Complex64 {
    let d = l1 - l2;
    let phase = match geom.kind {
        SlitKind::Single => Complex64::new(1.0, 0.0),
        SlitKind::Double => Complex64::from_polar(1.0, -geom.separation * d as f64 / 2.0),
    };
    let s = (l1 + l2) as f64;
    phase * (params.eta0 * angular_kernel(d, geom) * (-s * s / (4.0 * params.lambda_bw)).exp())
}

/// Gaussian state of the amplitude pair (α, β) = (E_ℓ1, E_ℓ2).
///
/// The real 4-vector (Re α, Im α, Re β, Im β) has covariance `gamma`;
/// per-quadrature variances are σ1, σ2 so ⟨|α − μ1|²⟩ = 2σ1. A pair with
/// ℓ1 = ℓ2 is the same field amplitude seen twice: its covariance is rank 2
/// and it is flagged `coincident`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModePairGaussian {
    pub l1: i64,
    pub l2: i64,
    pub mu1: Complex64,
    pub mu2: Complex64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub eta: Complex64,
    pub gamma: [[f64; 4]; 4],
    pub coincident: bool,
}

fn gamma_matrix(sigma1: f64, sigma2: f64, eta: Complex64) -> [[f64; 4]; 4] {
    let (er, ei) = (eta.re, eta.im);
    [[sigma1, 0.0, er, -ei], [0.0, sigma1, ei, er], [er, ei, sigma2, 0.0], [-ei, er, 0.0, sigma2]]
}

impl ModePairGaussian {
    /// Builds a state from its moments. A rank-deficient covariance is
    /// accepted only for ℓ1 = ℓ2.
    #[allow(clippy::too_many_arguments)]
    pub fn from_moments(
        l1: i64,
        l2: i64,
        mu1: Complex64,
        mu2: Complex64,
        sigma1: f64,
        sigma2: f64,
        eta: Complex64,
        degeneracy_eps: f64,
    ) -> Result<Self> {
        if !(sigma1 > 0.0 && sigma2 > 0.0) {
            return Err(Error::InvalidParameter(format!("variances must be positive: {sigma1}, {sigma2}")));
        }
        let det = sigma1 * sigma2 - eta.norm_sqr();
        let threshold = degeneracy_eps * sigma1 * sigma2;
        let coincident = det <= threshold;
        if coincident && l1 != l2 {
            return Err(Error::DegenerateCovariance { det, threshold });
        }
        if coincident && det < -1e-9 * sigma1 * sigma2 {
            return Err(Error::InvalidParameter(format!("|eta|^2 exceeds sigma1*sigma2 by {:e}", -det)));
        }
        Ok(Self { l1, l2, mu1, mu2, sigma1, sigma2, eta, gamma: gamma_matrix(sigma1, sigma2, eta), coincident })
    }

    /// Single field mode seen in both arms.
    pub fn single_mode(l: i64, mu: Complex64, sigma: f64) -> Result<Self> {
        Self::from_moments(l, l, mu, mu, sigma, sigma, Complex64::new(sigma, 0.0), 0.0)
    }

    /// σ1σ2 − |η|².
    pub fn determinant(&self) -> f64 {
        self.sigma1 * self.sigma2 - self.eta.norm_sqr()
    }

    /// Mean photon number of each mode before the splitter, 2σ + |μ|².
    pub fn mean_photons(&self) -> (f64, f64) {
        (2.0 * self.sigma1 + self.mu1.norm_sqr(), 2.0 * self.sigma2 + self.mu2.norm_sqr())
    }

    /// True when the two amplitudes are uncorrelated.
    pub fn is_factorized(&self) -> bool {
        self.eta.re == 0.0 && self.eta.im == 0.0
    }

    /// Same state with (μ, σ, η) → (tμ, t²σ, t²η).
    pub fn scaled(&self, t: f64) -> Self {
        let t2 = t * t;
        let eta = self.eta * t2;
        Self {
            mu1: self.mu1 * t,
            mu2: self.mu2 * t,
            sigma1: self.sigma1 * t2,
            sigma2: self.sigma2 * t2,
            eta,
            gamma: gamma_matrix(self.sigma1 * t2, self.sigma2 * t2, eta),
            ..*self
        }
    }

    pub fn ensure_nondegenerate(&self) -> Result<()> {
        if self.coincident {
            Err(Error::DegenerateCovariance { det: self.determinant(), threshold: 0.0 })
        } else {
            Ok(())
        }
    }
}

/// Assembles the Gaussian state of the mode pair (ℓ1, ℓ2).
pub fn mode_pair_state(l1: i64, l2: i64, geom: &SlitGeometry, params: &SourceParams) -> Result<ModePairGaussian> {
    geom.validate()?;
    params.validate()?;
    let mu1 = mean_amplitude(l1, geom, params);
    let mu2 = mean_amplitude(l2, geom, params);
    if l1 == l2 {
        let sigma = covariance(l1, l1, geom, params).re;
        return ModePairGaussian::from_moments(
            l1,
            l2,
            mu1,
            mu2,
            sigma,
            sigma,
            Complex64::new(sigma, 0.0),
            params.degeneracy_eps,
        );
    }
    let sigma1 = covariance(l1, l1, geom, params).re;
    let sigma2 = covariance(l2, l2, geom, params).re;
    let eta = covariance(l1, l2, geom, params);
    ModePairGaussian::from_moments(l1, l2, mu1, mu2, sigma1, sigma2, eta, params.degeneracy_eps)
}

/// Complex-Gaussian density P(α, β) for a nondegenerate pair.
pub fn p_function_density(state: &ModePairGaussian, alpha: Complex64, beta: Complex64) -> Result<f64> {
    state.ensure_nondegenerate()?;
    let det = state.determinant();
    let da = alpha - state.mu1;
    let db = beta - state.mu2;
    let cross = (da.conj() * db * state.eta).re;
    let q = (state.sigma2 * da.norm_sqr() + state.sigma1 * db.norm_sqr() - 2.0 * cross) / (2.0 * det);
    Ok((-q).exp() / (4.0 * PI * PI * det.abs()))
}
