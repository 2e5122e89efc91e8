//! Fock matrix elements Tr[ρ_out |N,M⟩⟨K,L|] of the split state.
//!
//! With a = t1 α and b = i t2 β,
//! Tr[ρ_out |N,M⟩⟨K,L|] = ∫ P e^{−|a|²−|b|²} ā^N a^K b̄^M b^L / √(N! K! M! L!).
//! Expanding ā^N a^K in the real coordinates (α1, α2) and b̄^M b^L in
//! (β1, β2) turns the integral into a finite sum of moments f(p, q, r, s).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::moments::MomentContext;
use super::vars::{AbstractedVars, DecoupledFrame};
use crate::error::{Error, Result};
use crate::numeric::combinatorics::ln_factorial;
use crate::numeric::{DoubleDouble, Real};
use crate::source::ModePairGaussian;

/// Elements whose scaled error estimate is below this absolute level are
/// accepted regardless of their relative error. Every element is bounded by
/// one in magnitude, so this only affects values that vanish by symmetry.
pub const ABSOLUTE_ERROR_FLOOR: f64 = 1e-30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FockConfig {
    /// Largest photon number evaluated in double precision.
    pub photon_cap_double: usize,
    /// Hard photon cap; the double-double path serves the range above
    /// `photon_cap_double`.
    pub photon_cap_max: usize,
    pub memoize: bool,
    /// Relative error bound that triggers the extended-precision fallback.
    pub precision_rel: f64,
    pub tail_tolerance: f64,
    /// Skip double precision entirely.
    pub force_extended: bool,
    /// Evaluate η = 0 distributions as an outer product of marginals.
    pub factorized_fast_path: bool,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            photon_cap_double: 25,
            photon_cap_max: 60,
            memoize: true,
            precision_rel: 1e-6,
            tail_tolerance: 1e-6,
            force_extended: false,
            factorized_fast_path: true,
        }
    }
}

fn i_power(e: i64) -> (i32, i32) {
    match e.rem_euclid(4) {
        0 => (1, 0),
        1 => (0, 1),
        2 => (-1, 0),
        _ => (0, -1),
    }
}

/// Element evaluation in one scalar type.
#[derive(Clone, Debug)]
pub struct FockContext<T: Real> {
    moments: MomentContext<T>,
    t1: f64,
    t2: f64,
    precision_rel: f64,
}

/// Outcome of one element evaluation before the precision verdict.
#[derive(Clone, Copy, Debug)]
pub struct ElementEstimate {
    pub value: Complex64,
    /// Absolute rounding-error estimate of `value`.
    pub error: f64,
}

impl ElementEstimate {
    pub fn is_accurate(&self, rel: f64) -> bool {
        self.error <= rel * self.value.norm() || self.error <= ABSOLUTE_ERROR_FLOOR
    }
}

impl<T: Real> FockContext<T> {
    /// Context for arm transmissions (t1, t2) and photon numbers up to `cap`.
    pub fn new(state: &ModePairGaussian, t1: f64, t2: f64, cap: usize, memoize: bool) -> Result<Self> {
        let frame = DecoupledFrame::for_state(state, t1, t2)?;
        Ok(Self::from_frame(frame, t1, t2, cap, memoize))
    }

    pub(crate) fn from_frame(frame: DecoupledFrame, t1: f64, t2: f64, cap: usize, memoize: bool) -> Self {
        Self { moments: MomentContext::new(frame, cap.max(1), memoize), t1, t2, precision_rel: 1e-6 }
    }

    pub fn with_precision(mut self, rel: f64) -> Self {
        self.precision_rel = rel;
        self
    }

    pub fn cap(&self) -> usize {
        self.moments.order_cap()
    }

    pub fn moments(&mut self) -> &mut MomentContext<T> {
        &mut self.moments
    }

    /// Σ_{n'+k'=p} C(N,n') C(K,k') i^{(K−k')−(N−n')} for p = 0..=N+K, as
    /// (re, im, |·|) triples.
    fn weights(&self, n: usize, k: usize, phase: i64) -> Vec<(T, T, f64)> {
        let binom = self.moments.binomials();
        let mut out = vec![(T::zero(), T::zero(), 0.0); n + k + 1];
        for a in 0..=n {
            for b in 0..=k {
                let c = binom.get(n, a) * binom.get(k, b);
                let (re, im) = i_power(phase + (k - b) as i64 - (n - a) as i64);
                let w = &mut out[a + b];
                match (re, im) {
                    (1, 0) => w.0 += c,
                    (-1, 0) => w.0 = w.0 - c,
                    (0, 1) => w.1 += c,
                    _ => w.1 = w.1 - c,
                }
                w.2 += c.to_f64();
            }
        }
        out
    }

    /// Element together with its rounding-error estimate.
    pub fn estimate(&mut self, n: usize, m: usize, k: usize, l: usize) -> Result<ElementEstimate> {
        let cap = self.cap();
        let top = n.max(m).max(k).max(l);
        if top > cap {
            return Err(Error::PhotonCapExceeded { requested: top, cap });
        }
        let pa = n + k;
        let pb = m + l;
        let zero_arm = (pa > 0 && self.t1 == 0.0) || (pb > 0 && self.t2 == 0.0);
        if zero_arm {
            return Ok(ElementEstimate { value: Complex64::new(0.0, 0.0), error: 0.0 });
        }
        let mut scale_log = self.moments.log_prefactor()
            - 0.5 * (ln_factorial(n) + ln_factorial(k) + ln_factorial(m) + ln_factorial(l));
        if pa > 0 {
            scale_log += pa as f64 * self.t1.abs().ln();
        }
        if pb > 0 {
            scale_log += pb as f64 * self.t2.abs().ln();
        }
        let negative = (self.t1 < 0.0 && pa % 2 == 1) != (self.t2 < 0.0 && pb % 2 == 1);
        let wa = self.weights(n, k, 0);
        let wb = self.weights(m, l, l as i64 - m as i64);
        let mut re = crate::numeric::CompensatedSum::<T>::new();
        let mut im = crate::numeric::CompensatedSum::<T>::new();
        for (p, a) in wa.iter().enumerate() {
            if a.2 == 0.0 {
                continue;
            }
            for (r, b) in wb.iter().enumerate() {
                let f = self.moments.f_normalized(p, pa - p, r, pb - r)?;
                // (a.re + i a.im)(b.re + i b.im) f
                let wr = a.0 * b.0 - a.1 * b.1;
                let wi = a.0 * b.1 + a.1 * b.0;
                let mag = a.2 * b.2 * f.magnitude;
                re.add(wr * f.value, mag);
                im.add(wi * f.value, mag);
            }
        }
        let scale = if negative { -scale_log.exp() } else { scale_log.exp() };
        let value = Complex64::new(re.value().to_f64(), im.value().to_f64()) * scale;
        let depth = (pa + pb + 16) as f64;
        let error = depth * T::EPSILON * re.magnitude().max(im.magnitude()) * scale.abs();
        Ok(ElementEstimate { value, error })
    }

    /// Element, failing with PrecisionLoss when the estimate is too loose.
    pub fn element(&mut self, n: usize, m: usize, k: usize, l: usize) -> Result<Complex64> {
        let est = self.estimate(n, m, k, l)?;
        if !est.is_accurate(self.precision_rel) {
            return Err(Error::PrecisionLoss { estimate: est.error, magnitude: est.value.norm() });
        }
        Ok(est.value)
    }
}

/// Element evaluator that starts in double precision and moves individual
/// elements to double-double when their error estimate is too large.
#[derive(Clone, Debug)]
pub struct FockEvaluator {
    state: ModePairGaussian,
    t1: f64,
    t2: f64,
    cap: usize,
    config: FockConfig,
    double: Option<FockContext<f64>>,
    extended: Option<FockContext<DoubleDouble>>,
    extended_evaluations: usize,
}

impl FockEvaluator {
    /// Evaluator for the splitter angle `theta` and photon numbers ≤ `cap`.
    pub fn new(state: &ModePairGaussian, theta: f64, cap: usize, config: &FockConfig) -> Result<Self> {
        Self::for_transmissions(state, theta.cos(), theta.sin(), cap, config)
    }

    pub fn for_transmissions(
        state: &ModePairGaussian,
        t1: f64,
        t2: f64,
        cap: usize,
        config: &FockConfig,
    ) -> Result<Self> {
        if cap > config.photon_cap_max {
            return Err(Error::PhotonCapExceeded { requested: cap, cap: config.photon_cap_max });
        }
        // Validates the state before any work is done.
        DecoupledFrame::for_state(state, t1, t2)?;
        Ok(Self {
            state: *state,
            t1,
            t2,
            cap,
            config: config.clone(),
            double: None,
            extended: None,
            extended_evaluations: 0,
        })
    }

    /// Number of elements that needed the double-double path.
    pub fn extended_evaluations(&self) -> usize {
        self.extended_evaluations
    }

    fn extended_context(&mut self) -> Result<&mut FockContext<DoubleDouble>> {
        if self.extended.is_none() {
            let ctx = FockContext::new(&self.state, self.t1, self.t2, self.cap, self.config.memoize)?
                .with_precision(self.config.precision_rel);
            self.extended = Some(ctx);
        }
        Ok(self.extended.as_mut().expect("initialized above"))
    }

    pub fn element(&mut self, n: usize, m: usize, k: usize, l: usize) -> Result<Complex64> {
        let top = n.max(m).max(k).max(l);
        if top > self.cap {
            return Err(Error::PhotonCapExceeded { requested: top, cap: self.cap });
        }
        let use_double = !self.config.force_extended && self.cap <= self.config.photon_cap_double;
        if use_double {
            if self.double.is_none() {
                self.double = Some(
                    FockContext::new(&self.state, self.t1, self.t2, self.cap, self.config.memoize)?
                        .with_precision(self.config.precision_rel),
                );
            }
            let est = self.double.as_mut().expect("initialized above").estimate(n, m, k, l)?;
            if est.is_accurate(self.config.precision_rel) {
                return Ok(est.value);
            }
            log::debug!("element ({n},{m},{k},{l}) moved to double-double: error {:e}", est.error);
        }
        self.extended_evaluations += 1;
        self.extended_context()?.element(n, m, k, l)
    }
}

/// Tr[ρ_out |N,M⟩⟨K,L|] for the state behind a splitter of angle `theta`.
pub fn fock_matrix_element(
    state: &ModePairGaussian,
    theta: f64,
    n: usize,
    m: usize,
    k: usize,
    l: usize,
) -> Result<Complex64> {
    fock_matrix_element_with(state, theta, n, m, k, l, &FockConfig::default())
}

pub fn fock_matrix_element_with(
    state: &ModePairGaussian,
    theta: f64,
    n: usize,
    m: usize,
    k: usize,
    l: usize,
    config: &FockConfig,
) -> Result<Complex64> {
    let top = n.max(m).max(k).max(l);
    if top > config.photon_cap_max {
        return Err(Error::PhotonCapExceeded { requested: top, cap: config.photon_cap_max });
    }
    let mut ev = FockEvaluator::new(state, theta, top, config)?;
    ev.element(n, m, k, l)
}

/// f(n, m, k, l) = ∫ P e^{−cos²θ|α|² − sin²θ|β|²} α1ⁿ α2ᵐ β1ᵏ β2ˡ d²α d²β.
pub fn f_moment(
    vars: &AbstractedVars,
    state: &ModePairGaussian,
    n: usize,
    m: usize,
    k: usize,
    l: usize,
) -> Result<f64> {
    let frame = DecoupledFrame::from_vars(vars, state);
    let cap = (n + m).max(k + l).div_ceil(2).max(1);
    MomentContext::<f64>::new(frame, cap, false).f_moment(n, m, k, l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn thermal(nbar: f64, n: usize) -> f64 {
        nbar.powi(n as i32) / (1.0 + nbar).powi(n as i32 + 1)
    }

    #[test]
    fn thermal_single_mode() {
        let st = ModePairGaussian::single_mode(0, Complex64::new(0.0, 0.0), 0.6).unwrap();
        for n in 0..=15 {
            let p = fock_matrix_element(&st, 0.0, n, 0, n, 0).unwrap();
            let want = thermal(1.2, n);
            assert!(((p.re - want) / want).abs() < 1e-9, "n={n}: {} vs {want}", p.re);
            assert!(p.im.abs() < 1e-14);
        }
    }

    #[test]
    fn coherent_state_is_poissonian() {
        // A vanishing variance approaches a coherent state.
        let mu = Complex64::new(0.8, -0.6);
        let st = ModePairGaussian::single_mode(0, mu, 1e-9).unwrap();
        for n in 0..8 {
            let p = fock_matrix_element(&st, 0.0, n, 0, n, 0).unwrap().re;
            let want = (-1.0f64).exp() / (1..=n).map(|k| k as f64).product::<f64>();
            assert!((p - want).abs() < 1e-7, "{n}: {p} vs {want}");
        }
    }

    #[test]
    fn theta_zero_empties_arm_two() {
        let st = ModePairGaussian::from_moments(
            0,
            1,
            Complex64::new(0.5, 0.1),
            Complex64::new(0.2, -0.3),
            0.5,
            0.4,
            Complex64::new(0.2, 0.1),
            1e-14,
        )
        .unwrap();
        assert_eq!(fock_matrix_element(&st, 0.0, 2, 1, 2, 1).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn hermitian_and_real_diagonal() {
        let st = ModePairGaussian::from_moments(
            0,
            1,
            Complex64::new(0.5, 0.1),
            Complex64::new(0.2, -0.3),
            0.5,
            0.4,
            Complex64::new(0.2, 0.1),
            1e-14,
        )
        .unwrap();
        let mut ev = FockEvaluator::new(&st, FRAC_PI_4, 4, &FockConfig::default()).unwrap();
        let a = ev.element(2, 1, 0, 3).unwrap();
        let b = ev.element(0, 3, 2, 1).unwrap();
        assert!((a - b.conj()).norm() < 1e-14);
        let d = ev.element(3, 2, 3, 2).unwrap();
        assert!(d.im.abs() <= 1e-12 * d.norm());
    }

    #[test]
    fn photon_cap_is_enforced() {
        let st = ModePairGaussian::single_mode(0, Complex64::new(0.0, 0.0), 0.6).unwrap();
        let cfg = FockConfig { photon_cap_max: 10, ..FockConfig::default() };
        assert!(matches!(fock_matrix_element_with(&st, 0.0, 11, 0, 11, 0, &cfg), Err(Error::PhotonCapExceeded { .. })));
    }

    #[test]
    fn extended_path_agrees_with_double() {
        let st = ModePairGaussian::single_mode(0, Complex64::new(0.4, 0.3), 0.5).unwrap();
        let cfg = FockConfig { force_extended: true, ..FockConfig::default() };
        for n in [0, 3, 9] {
            let a = fock_matrix_element(&st, FRAC_PI_4, n, n, n, n).unwrap().re;
            let b = fock_matrix_element_with(&st, FRAC_PI_4, n, n, n, n, &cfg).unwrap().re;
            assert!(((a - b) / b).abs() < 1e-12);
        }
    }

    #[test]
    fn centered_uncorrelated_odd_moments_vanish() {
        let st = ModePairGaussian::from_moments(
            0,
            1,
            Complex64::default(),
            Complex64::default(),
            0.5,
            0.7,
            Complex64::default(),
            1e-14,
        )
        .unwrap();
        let v = abstracted_vars_pi4(&st);
        assert_eq!(f_moment(&v, &st, 1, 2, 0, 2).unwrap(), 0.0);
        assert_eq!(f_moment(&v, &st, 2, 2, 3, 0).unwrap(), 0.0);
        assert!(f_moment(&v, &st, 2, 2, 2, 0).unwrap() > 0.0);
    }

    fn abstracted_vars_pi4(st: &ModePairGaussian) -> AbstractedVars {
        super::super::vars::abstracted_vars(st, FRAC_PI_4).unwrap()
    }
}
