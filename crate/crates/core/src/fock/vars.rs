//! Change of coordinates that decouples the Gaussian weight of the
//! Fock-projection integrals.
//!
//! With α = A and β = K·A + B (+ h), the exponent of
//! P(α, β) · exp(−t1²|α|² − t2²|β|²) separates into
//! −z0|A|² − u·A − z_b|B|² − v·B − C, so every moment integral factorizes
//! into one-dimensional integrals I(n, a, b).

use crate::error::Result;
use crate::source::ModePairGaussian;

/// Intermediate and abstracted scalars of the decoupled frame for a
/// nondegenerate pair observed through a splitter of angle `theta`.
///
/// `z1 = z2` is the quadratic coefficient of both B coordinates; the
/// α-block coefficient is `z0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbstractedVars {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub z0: f64,
    pub z1: f64,
    pub z2: f64,
    pub u1: f64,
    pub u2: f64,
    pub v1: f64,
    pub v2: f64,
    pub c: f64,
    pub theta: f64,
    /// η = 0: the B coordinates coincide with β and K = 0.
    pub factorized: bool,
}

/// Builds the abstracted variables for arm transmissions (cos θ, sin θ).
pub fn abstracted_vars(state: &ModePairGaussian, theta: f64) -> Result<AbstractedVars> {
    let mut v = abstracted_vars_for_transmissions(state, theta.cos(), theta.sin())?;
    v.theta = theta;
    Ok(v)
}

pub(crate) fn abstracted_vars_for_transmissions(state: &ModePairGaussian, t1: f64, t2: f64) -> Result<AbstractedVars> {
    state.ensure_nondegenerate()?;
    let det = state.determinant();
    let x1 = state.sigma1 / (2.0 * det);
    let x2 = state.sigma2 / (2.0 * det);
    let y1 = state.eta.re / (2.0 * det);
    let y2 = state.eta.im / (2.0 * det);
    let (w1, w2) = (t1 * t1, t2 * t2);
    let zb = x1 + w2;
    let y_sq = y1 * y1 + y2 * y2;
    let z0 = x2 + w1 - y_sq / zb;

    let (m1, m2, m3, m4) = (state.mu1.re, state.mu1.im, state.mu2.re, state.mu2.im);
    // Y = [[y1, -y2], [y2, y1]]; g_a = 2 x2 μa − 2 Y μb; g_b = 2 x1 μb − 2 Yᵀ μa
    let ga1 = 2.0 * x2 * m1 - 2.0 * (y1 * m3 - y2 * m4);
    let ga2 = 2.0 * x2 * m2 - 2.0 * (y2 * m3 + y1 * m4);
    let gb1 = 2.0 * x1 * m3 - 2.0 * (y1 * m1 + y2 * m2);
    let gb2 = 2.0 * x1 * m4 - 2.0 * (-y2 * m1 + y1 * m2);
    // K = Yᵀ / z_b = [[y1, y2], [-y2, y1]] / z_b; u = −(g_a + Kᵀ g_b)
    let u1 = -(ga1 + (y1 * gb1 - y2 * gb2) / zb);
    let u2 = -(ga2 + (y2 * gb1 + y1 * gb2) / zb);
    let c = x2 * (m1 * m1 + m2 * m2) + x1 * (m3 * m3 + m4 * m4)
        - 2.0 * (m1 * (y1 * m3 - y2 * m4) + m2 * (y2 * m3 + y1 * m4));

    Ok(AbstractedVars {
        x1,
        x2,
        y1,
        y2,
        z0,
        z1: zb,
        z2: zb,
        u1,
        u2,
        v1: -gb1,
        v2: -gb2,
        c,
        theta: t2.atan2(t1),
        factorized: y1 == 0.0 && y2 == 0.0,
    })
}

/// Internal representation shared by nondegenerate and coincident pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct DecoupledFrame {
    pub za: f64,
    pub ua: [f64; 2],
    /// Quadratic coefficient of B; `None` when β is a deterministic
    /// function of α (coincident pair).
    pub zb: Option<f64>,
    pub vb: [f64; 2],
    /// β = K A + B + h, row-major.
    pub k: [[f64; 2]; 2],
    pub h: [f64; 2],
    /// ln of the factor multiplying the normalized moment sums.
    pub log_prefactor: f64,
    pub factorized: bool,
}

impl DecoupledFrame {
    pub fn from_vars(v: &AbstractedVars, state: &ModePairGaussian) -> Self {
        let zb = v.z1;
        let k = [[v.y1 / zb, v.y2 / zb], [-v.y2 / zb, v.y1 / zb]];
        let log_prefactor = -(4.0 * state.determinant() * v.z0 * zb).ln()
            + (v.u1 * v.u1 + v.u2 * v.u2) / (4.0 * v.z0)
            + (v.v1 * v.v1 + v.v2 * v.v2) / (4.0 * zb)
            - v.c;
        Self {
            za: v.z0,
            ua: [v.u1, v.u2],
            zb: Some(zb),
            vb: [v.v1, v.v2],
            k,
            h: [0.0, 0.0],
            log_prefactor,
            factorized: v.factorized,
        }
    }

    /// β = μ2 + ρ (α − μ1) with ρ = conj(η)/σ1.
    fn coincident(state: &ModePairGaussian, t1: f64, t2: f64) -> Self {
        let s1 = state.sigma1;
        let rho = state.eta.conj() / s1;
        let (rr, ri) = (rho.re, rho.im);
        let k = [[rr, -ri], [ri, rr]];
        let (m1, m2) = (state.mu1.re, state.mu1.im);
        let h = [state.mu2.re - (rr * m1 - ri * m2), state.mu2.im - (ri * m1 + rr * m2)];
        let (w1, w2) = (t1 * t1, t2 * t2);
        let za = 1.0 / (2.0 * s1) + w1 + w2 * rho.norm_sqr();
        // Kᵀ h
        let kth = [rr * h[0] + ri * h[1], -ri * h[0] + rr * h[1]];
        let ua = [-(m1 / s1 - 2.0 * w2 * kth[0]), -(m2 / s1 - 2.0 * w2 * kth[1])];
        let c = (m1 * m1 + m2 * m2) / (2.0 * s1) + w2 * (h[0] * h[0] + h[1] * h[1]);
        let log_prefactor = -(2.0 * s1 * za).ln() + (ua[0] * ua[0] + ua[1] * ua[1]) / (4.0 * za) - c;
        Self { za, ua, zb: None, vb: [0.0, 0.0], k, h, log_prefactor, factorized: false }
    }

    pub fn for_state(state: &ModePairGaussian, t1: f64, t2: f64) -> Result<Self> {
        if state.coincident {
            Ok(Self::coincident(state, t1, t2))
        } else {
            let v = abstracted_vars_for_transmissions(state, t1, t2)?;
            Ok(Self::from_vars(&v, state))
        }
    }
}
