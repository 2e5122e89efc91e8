//! C interface to oampnr.
//!
//! Objects cross the boundary as opaque pointers made by the constructor
//! functions and released by the matching `*_free`. Every fallible call
//! returns an `OampnrStatus`; on failure the message is available from
//! `oampnr_last_error` on the same thread until the next failing call.
//! Panics are caught at the boundary and reported as `OAMPNR_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use oampnr::correlators::{g2_classical, g2_multiphoton_with};
use oampnr::fock::{joint_pnr_distribution_with, JointPnrDistribution};
use oampnr::montecarlo::{compare, estimate_g2_classical, sample_joint_pnr, McConfig};
use oampnr::profile::RunProfile;
use oampnr::source::{mode_pair_state, ModePairGaussian};
use oampnr::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OampnrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Config = 3,
    DegenerateCovariance = 4,
    CapExceeded = 5,
    PrecisionLoss = 6,
    TailTolerance = 7,
    Tolerance = 8,
    Io = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// Run profile: geometry, source parameters and numerical settings.
pub struct OampnrProfile(RunProfile);

/// Gaussian state of one (ℓ1, ℓ2) mode pair.
pub struct OampnrState(ModePairGaussian);

/// Joint photon-number distribution P(N, M).
pub struct OampnrDistribution(JointPnrDistribution);

/// Monte Carlo check of a distribution.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct OampnrAgreement {
    pub tv_distance: f64,
    pub aggregate_stderr: f64,
    pub coverage: f64,
    pub g2_analytic: f64,
    pub g2_estimate: f64,
    pub g2_stderr: f64,
    /// 1 when the TV distance is below three aggregate standard errors and
    /// the g² estimate lies within three of its own.
    pub passes: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OampnrStatus {
    match e {
        Error::InvalidParameter(_) | Error::NonPositiveQuadratic(_) | Error::InsufficientFrames { .. } => {
            OampnrStatus::InvalidParameter
        }
        Error::Config(_) => OampnrStatus::Config,
        Error::DegenerateCovariance { .. } => OampnrStatus::DegenerateCovariance,
        Error::OrderCapExceeded { .. } | Error::PhotonCapExceeded { .. } => OampnrStatus::CapExceeded,
        Error::PrecisionLoss { .. } => OampnrStatus::PrecisionLoss,
        Error::TailToleranceExceeded { .. } => OampnrStatus::TailTolerance,
        Error::Tolerance(_) => OampnrStatus::Tolerance,
        Error::Io(_) => OampnrStatus::Io,
    }
}

fn fail(status: OampnrStatus, msg: impl Into<String>) -> OampnrStatus {
    set_error(msg.into());
    status
}

/// Runs `f` with panics and library errors mapped to a status.
fn guard(f: impl FnOnce() -> Result<(), OampnrStatus>) -> OampnrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OampnrStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(OampnrStatus::Panic, msg)
        }
    }
}

fn lib<T>(r: oampnr::Result<T>) -> Result<T, OampnrStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, OampnrStatus> {
    // SAFETY: callers pass pointers obtained from this library or null
    unsafe { p.as_ref() }.ok_or_else(|| fail(OampnrStatus::NullPointer, format!("{what} is null")))
}

fn out<T>(p: *mut T, v: T, what: &str) -> Result<(), OampnrStatus> {
    if p.is_null() {
        return Err(fail(OampnrStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: checked non-null; the caller owns the slot
    unsafe { p.write(v) };
    Ok(())
}

fn boxed<T>(slot: *mut *mut T, v: T) -> Result<(), OampnrStatus> {
    out(slot, Box::into_raw(Box::new(v)), "output handle")
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn oampnr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn oampnr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The built-in profile: double slit, fitted source, 50:50 splitter.
#[no_mangle]
pub extern "C" fn oampnr_profile_paper_fit() -> *mut OampnrProfile {
    Box::into_raw(Box::new(OampnrProfile(RunProfile::paper_fit())))
}

/// Parses a JSON profile. Unknown keys are rejected.
///
/// # Safety
/// `json` must be a nul-terminated string; `profile_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oampnr_profile_from_json(
    json: *const c_char,
    profile_out: *mut *mut OampnrProfile,
) -> OampnrStatus {
    guard(|| {
        let s = deref(json, "json")?;
        // SAFETY: caller guarantees nul termination
        let text = unsafe { CStr::from_ptr(s) }
            .to_str()
            .map_err(|e| fail(OampnrStatus::Config, format!("profile is not UTF-8: {e}")))?;
        let p = lib(RunProfile::from_json(text, "<json>"))?;
        boxed(profile_out, OampnrProfile(p))
    })
}

/// Writes the 16-hex-digit profile digest and a nul into `buf`, which must
/// hold at least 17 bytes.
///
/// # Safety
/// `buf` must be writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn oampnr_profile_digest(
    profile: *const OampnrProfile,
    buf: *mut c_char,
    len: usize,
) -> OampnrStatus {
    guard(|| {
        let p = deref(profile, "profile")?;
        if buf.is_null() {
            return Err(fail(OampnrStatus::NullPointer, "buf is null"));
        }
        let d = p.0.digest();
        if len < d.len() + 1 {
            return Err(fail(OampnrStatus::BufferTooSmall, format!("need {} bytes, got {len}", d.len() + 1)));
        }
        // SAFETY: buf holds at least d.len() + 1 bytes
        unsafe {
            ptr::copy_nonoverlapping(d.as_ptr().cast::<c_char>(), buf, d.len());
            *buf.add(d.len()) = 0;
        }
        Ok(())
    })
}

/// # Safety
/// `profile` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn oampnr_profile_free(profile: *mut OampnrProfile) {
    if !profile.is_null() {
        // SAFETY: created by Box::into_raw in this library
        drop(unsafe { Box::from_raw(profile) });
    }
}

/// State of the mode pair (ℓ1, ℓ2) under a profile's geometry and source.
///
/// # Safety
/// `state_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oampnr_state_from_profile(
    profile: *const OampnrProfile,
    l1: i64,
    l2: i64,
    state_out: *mut *mut OampnrState,
) -> OampnrStatus {
    guard(|| {
        let p = deref(profile, "profile")?;
        let s = lib(mode_pair_state(l1, l2, &p.0.geometry, &p.0.source))?;
        boxed(state_out, OampnrState(s))
    })
}

/// State from explicit moments: means μ1, μ2, variances σ1, σ2 (with
/// ⟨|α − μ1|²⟩ = 2σ1) and cross term η. A rank-deficient covariance is
/// accepted only for l1 = l2, which denotes one mode seen in both arms.
///
/// # Safety
/// `state_out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn oampnr_state_from_moments(
    l1: i64,
    l2: i64,
    mu1_re: f64,
    mu1_im: f64,
    mu2_re: f64,
    mu2_im: f64,
    sigma1: f64,
    sigma2: f64,
    eta_re: f64,
    eta_im: f64,
    state_out: *mut *mut OampnrState,
) -> OampnrStatus {
    guard(|| {
        let s = lib(ModePairGaussian::from_moments(
            l1,
            l2,
            Complex64::new(mu1_re, mu1_im),
            Complex64::new(mu2_re, mu2_im),
            sigma1,
            sigma2,
            Complex64::new(eta_re, eta_im),
            1e-14,
        ))?;
        boxed(state_out, OampnrState(s))
    })
}

/// Mean photon numbers of the two modes before the splitter.
///
/// # Safety
/// `n1_out` and `n2_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oampnr_state_mean_photons(
    state: *const OampnrState,
    n1_out: *mut f64,
    n2_out: *mut f64,
) -> OampnrStatus {
    guard(|| {
        let (a, b) = deref(state, "state")?.0.mean_photons();
        out(n1_out, a, "n1_out")?;
        out(n2_out, b, "n2_out")
    })
}

/// Classical intensity correlation ⟨I1 I2⟩ / (⟨I1⟩⟨I2⟩).
///
/// # Safety
/// `g2_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oampnr_state_g2_classical(state: *const OampnrState, g2_out: *mut f64) -> OampnrStatus {
    guard(|| out(g2_out, g2_classical(&deref(state, "state")?.0), "g2_out"))
}

/// Photon-number-resolved coherence g̃²(n1, n2) behind a splitter of angle θ.
///
/// # Safety
/// `g2_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oampnr_state_g2_tilde(
    state: *const OampnrState,
    theta: f64,
    n1: usize,
    n2: usize,
    g2_out: *mut f64,
) -> OampnrStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let v = lib(g2_multiphoton_with(&s.0, theta, n1, n2, n1.max(n2), &Default::default()))?;
        out(g2_out, v, "g2_out")
    })
}

/// # Safety
/// `state` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn oampnr_state_free(state: *mut OampnrState) {
    if !state.is_null() {
        // SAFETY: created by Box::into_raw in this library
        drop(unsafe { Box::from_raw(state) });
    }
}

/// P(N, M) for N ≤ nmax, M ≤ mmax behind a splitter of angle θ, using the
/// profile's numerical settings (or the defaults when `profile` is null).
///
/// # Safety
/// `dist_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oampnr_joint_pnr(
    state: *const OampnrState,
    profile: *const OampnrProfile,
    theta: f64,
    nmax: usize,
    mmax: usize,
    dist_out: *mut *mut OampnrDistribution,
) -> OampnrStatus {
    guard(|| {
        let s = deref(state, "state")?;
        // SAFETY: null or a profile from this library
        let cfg = unsafe { profile.as_ref() }.map(|p| p.0.fock.clone()).unwrap_or_default();
        let d = lib(joint_pnr_distribution_with(&s.0, theta, nmax, mmax, &cfg))?;
        boxed(dist_out, OampnrDistribution(d))
    })
}

/// Grid size (nmax + 1, mmax + 1) and the probability mass beyond it.
///
/// # Safety
/// Output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn oampnr_distribution_shape(
    dist: *const OampnrDistribution,
    rows_out: *mut usize,
    cols_out: *mut usize,
    tail_mass_out: *mut f64,
) -> OampnrStatus {
    guard(|| {
        let d = &deref(dist, "dist")?.0;
        out(rows_out, d.nmax + 1, "rows_out")?;
        out(cols_out, d.mmax + 1, "cols_out")?;
        out(tail_mass_out, d.tail_mass, "tail_mass_out")
    })
}

/// Copies P(N, M) row-major (index N·cols + M) into `buf`.
///
/// # Safety
/// `buf` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn oampnr_distribution_copy(
    dist: *const OampnrDistribution,
    buf: *mut f64,
    len: usize,
) -> OampnrStatus {
    guard(|| {
        let d = &deref(dist, "dist")?.0;
        if buf.is_null() {
            return Err(fail(OampnrStatus::NullPointer, "buf is null"));
        }
        let need = (d.nmax + 1) * (d.mmax + 1);
        if len < need {
            return Err(fail(OampnrStatus::BufferTooSmall, format!("need {need} doubles, got {len}")));
        }
        for (i, v) in d.probs.iter().flatten().enumerate() {
            // SAFETY: i < need <= len
            unsafe { *buf.add(i) = *v };
        }
        Ok(())
    })
}

/// # Safety
/// `dist` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn oampnr_distribution_free(dist: *mut OampnrDistribution) {
    if !dist.is_null() {
        // SAFETY: created by Box::into_raw in this library
        drop(unsafe { Box::from_raw(dist) });
    }
}

/// Samples `samples` photon-count pairs with `seed` and compares them with
/// `dist`, which must have been computed from the same state and θ.
///
/// # Safety
/// `agreement_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oampnr_montecarlo_check(
    state: *const OampnrState,
    dist: *const OampnrDistribution,
    theta: f64,
    samples: u64,
    seed: u64,
    agreement_out: *mut OampnrAgreement,
) -> OampnrStatus {
    guard(|| {
        let s = &deref(state, "state")?.0;
        let d = &deref(dist, "dist")?.0;
        let cfg = McConfig::new(samples, seed);
        let e = lib(sample_joint_pnr(s, theta, &cfg, d.nmax, d.mmax))?;
        let ag = lib(compare(d, &e))?;
        let g = lib(estimate_g2_classical(s, theta, &cfg))?;
        let exact = g2_classical(s);
        let passes = ag.passes() && (g.value - exact).abs() <= 3.0 * g.stderr;
        out(
            agreement_out,
            OampnrAgreement {
                tv_distance: ag.tv_distance,
                aggregate_stderr: ag.aggregate_stderr,
                coverage: ag.coverage,
                g2_analytic: exact,
                g2_estimate: g.value,
                g2_stderr: g.stderr,
                passes: passes as i32,
            },
            "agreement_out",
        )
    })
}
