//! Memoized moment integrals f(n, m, k, l) = ∫ P e^{−t1²|α|²−t2²|β|²}
//! α1ⁿ α2ᵐ β1ᵏ β2ˡ in the decoupled frame.
//!
//! Expanding β1 = K₁·A + B1 + h1 and β2 = K₂·A + B2 + h2 with the multinomial
//! theorem gives
//!
//! f = pref · Σ_{j≤k} Σ_{i≤l} C(k,j) C(l,i) J1(j) J2(i) G(n, m, k−j, l−i)
//! G(n, m, a, b) = Σ_s H_{a,b}(s) Ĩ_A(n+s; u1) Ĩ_A(m+a+b−s; u2)
//!
//! where H_{a,b}(s) are the coefficients of (k11 X + k12)^a (k21 X + k22)^b,
//! J(j) = E[(B + h)^j] and Ĩ are the normalized one-dimensional moments.
//! Every stored quantity carries an f64 companion computed from absolute
//! values, which bounds the rounding error of the cancelling sums.

use rustc_hash::FxHashMap;
use std::sync::Arc;

use super::vars::DecoupledFrame;
use crate::error::{Error, Result};
use crate::numeric::combinatorics::BinomialTable;
use crate::numeric::{normalized_moments, CompensatedSum, Real};

type Key = [u16; 4];

/// Polynomial coefficients with their absolute values.
type Coefficients<T> = Arc<(Vec<T>, Vec<f64>)>;

/// Value together with its absolute-value companion.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tracked<T> {
    pub value: T,
    pub magnitude: f64,
}

#[derive(Clone, Debug)]
struct Tables<T: Real> {
    ia1: Vec<T>,
    ia2: Vec<T>,
    ia1_abs: Vec<f64>,
    ia2_abs: Vec<f64>,
    j1: Vec<T>,
    j2: Vec<T>,
    j1_abs: Vec<f64>,
    j2_abs: Vec<f64>,
}

impl<T: Real> Tables<T> {
    fn build(frame: &DecoupledFrame, binom: &BinomialTable<T>, order_cap: usize) -> Self {
        // A exponents reach (N+K) + (M+L) ≤ 4·cap; B exponents M+L ≤ 2·cap.
        let ia1: Vec<T> = normalized_moments(frame.za, frame.ua[0], 4 * order_cap);
        let ia2: Vec<T> = normalized_moments(frame.za, frame.ua[1], 4 * order_cap);
        let ia1_abs = ia1.iter().map(|x| x.abs().to_f64()).collect();
        let ia2_abs = ia2.iter().map(|x| x.abs().to_f64()).collect();
        let (j1, j1_abs) = Self::shifted_moments(frame, binom, 0, 2 * order_cap);
        let (j2, j2_abs) = Self::shifted_moments(frame, binom, 1, 2 * order_cap);
        Self { ia1, ia2, ia1_abs, ia2_abs, j1, j2, j1_abs, j2_abs }
    }

    /// J(j) = E[(B + h)^j] with B ~ exp(−z_b B² − v B) normalized.
    fn shifted_moments(
        frame: &DecoupledFrame,
        binom: &BinomialTable<T>,
        idx: usize,
        n_max: usize,
    ) -> (Vec<T>, Vec<f64>) {
        let h = T::from_f64(frame.h[idx]);
        let h_abs = frame.h[idx].abs();
        match frame.zb {
            None => {
                let vals: Vec<T> = (0..=n_max).map(|j| h.powi(j as u32)).collect();
                let abs = (0..=n_max).map(|j| h_abs.powi(j as i32)).collect();
                (vals, abs)
            }
            Some(zb) => {
                let ib: Vec<T> = normalized_moments(zb, frame.vb[idx], n_max);
                if frame.h[idx] == 0.0 {
                    let abs = ib.iter().map(|x| x.abs().to_f64()).collect();
                    return (ib, abs);
                }
                let mut vals = Vec::with_capacity(n_max + 1);
                let mut abs = Vec::with_capacity(n_max + 1);
                for j in 0..=n_max {
                    let mut acc = CompensatedSum::<T>::new();
                    for (i, &b) in ib.iter().enumerate().take(j + 1) {
                        let c = binom.get(j, i) * h.powi((j - i) as u32);
                        let t = c * b;
                        acc.add(t, t.abs().to_f64());
                    }
                    vals.push(acc.value());
                    abs.push(acc.magnitude());
                }
                (vals, abs)
            }
        }
    }
}

/// Moment-evaluation context for one (state, transmissions) pair.
///
/// With memoization on, Ĩ/J tables, H polynomials, G partial sums and f
/// values are cached; with it off, each f is rebuilt from scratch along the
/// identical arithmetic path, so both modes agree bit for bit.
#[derive(Clone, Debug)]
pub struct MomentContext<T: Real> {
    frame: DecoupledFrame,
    order_cap: usize,
    memoize: bool,
    binom: BinomialTable<T>,
    tables: Option<Arc<Tables<T>>>,
    h_cache: FxHashMap<(u16, u16), Coefficients<T>>,
    g_cache: FxHashMap<Key, Tracked<T>>,
    f_cache: FxHashMap<Key, Tracked<T>>,
}

impl<T: Real> MomentContext<T> {
    pub(crate) fn new(frame: DecoupledFrame, order_cap: usize, memoize: bool) -> Self {
        let binom = BinomialTable::new(2 * order_cap + 1);
        let tables = if memoize { Some(Arc::new(Tables::build(&frame, &binom, order_cap))) } else { None };
        Self {
            frame,
            order_cap,
            memoize,
            binom,
            tables,
            h_cache: FxHashMap::default(),
            g_cache: FxHashMap::default(),
            f_cache: FxHashMap::default(),
        }
    }

    pub fn order_cap(&self) -> usize {
        self.order_cap
    }

    pub(crate) fn binomials(&self) -> &BinomialTable<T> {
        &self.binom
    }

    pub fn cached_f_count(&self) -> usize {
        self.f_cache.len()
    }

    /// ln of the factor that turns normalized sums into integrals.
    pub fn log_prefactor(&self) -> f64 {
        self.frame.log_prefactor
    }

    /// f(n, m, k, l) as an ordinary f64 integral.
    pub fn f_moment(&mut self, n: usize, m: usize, k: usize, l: usize) -> Result<f64> {
        let t = self.f_normalized(n, m, k, l)?;
        Ok(t.value.to_f64() * self.frame.log_prefactor.exp())
    }

    fn check_order(&self, n: usize, m: usize, k: usize, l: usize) -> Result<()> {
        let order = (n + m).max(k + l);
        if order > 2 * self.order_cap {
            return Err(Error::OrderCapExceeded { order, cap: 2 * self.order_cap });
        }
        Ok(())
    }

    /// f divided by the prefactor, with its magnitude companion.
    pub(crate) fn f_normalized(&mut self, n: usize, m: usize, k: usize, l: usize) -> Result<Tracked<T>> {
        self.check_order(n, m, k, l)?;
        let key = [n as u16, m as u16, k as u16, l as u16];
        if self.memoize {
            if let Some(v) = self.f_cache.get(&key) {
                return Ok(*v);
            }
        }
        let tables = match &self.tables {
            Some(t) => Arc::clone(t),
            None => Arc::new(Tables::build(&self.frame, &self.binom, self.order_cap)),
        };
        let mut acc = CompensatedSum::<T>::new();
        let factorized = self.frame.factorized;
        for j in 0..=k {
            for i in 0..=l {
                let (a, b) = (k - j, l - i);
                if factorized && a + b > 0 {
                    continue;
                }
                let coef = self.binom.get(k, j) * self.binom.get(l, i);
                let jj = coef * tables.j1[j] * tables.j2[i];
                let jj_abs = coef.to_f64() * tables.j1_abs[j] * tables.j2_abs[i];
                if jj_abs == 0.0 {
                    continue;
                }
                let g = self.g_value(&tables, n, m, a, b);
                acc.add(jj * g.value, jj_abs * g.magnitude);
            }
        }
        let out = Tracked { value: acc.value(), magnitude: acc.magnitude() };
        if self.memoize {
            self.f_cache.insert(key, out);
        }
        Ok(out)
    }

    fn g_value(&mut self, tables: &Tables<T>, n: usize, m: usize, a: usize, b: usize) -> Tracked<T> {
        let key = [n as u16, m as u16, a as u16, b as u16];
        if self.memoize {
            if let Some(v) = self.g_cache.get(&key) {
                return *v;
            }
        }
        let poly = self.h_poly(a, b);
        let (coef, coef_abs) = (&poly.0, &poly.1);
        let deg = a + b;
        let mut acc = CompensatedSum::<T>::new();
        for s in 0..=deg {
            if coef_abs[s] == 0.0 {
                continue;
            }
            let t = coef[s] * tables.ia1[n + s] * tables.ia2[m + deg - s];
            acc.add(t, coef_abs[s] * tables.ia1_abs[n + s] * tables.ia2_abs[m + deg - s]);
        }
        let out = Tracked { value: acc.value(), magnitude: acc.magnitude() };
        if self.memoize {
            self.g_cache.insert(key, out);
        }
        out
    }

    /// Coefficients of (k11 X + k12)^a (k21 X + k22)^b and of the same
    /// product with absolute-valued entries.
    fn h_poly(&mut self, a: usize, b: usize) -> Coefficients<T> {
        if self.memoize {
            if let Some(p) = self.h_cache.get(&(a as u16, b as u16)) {
                return Arc::clone(p);
            }
        }
        let k = self.frame.k;
        let binom = &self.binom;
        let expand = |c1: f64, c0: f64, e: usize| -> (Vec<T>, Vec<f64>) {
            let (t1, t0) = (T::from_f64(c1), T::from_f64(c0));
            let v = (0..=e).map(|s| binom.get(e, s) * t1.powi(s as u32) * t0.powi((e - s) as u32)).collect();
            let w = (0..=e)
                .map(|s| binom.get(e, s).to_f64() * c1.abs().powi(s as i32) * c0.abs().powi((e - s) as i32))
                .collect();
            (v, w)
        };
        let (pa, pa_abs) = expand(k[0][0], k[0][1], a);
        let (pb, pb_abs) = expand(k[1][0], k[1][1], b);
        let mut coef = vec![T::zero(); a + b + 1];
        let mut coef_abs = vec![0.0; a + b + 1];
        for (i, (x, xa)) in pa.iter().zip(&pa_abs).enumerate() {
            for (j, (y, ya)) in pb.iter().zip(&pb_abs).enumerate() {
                coef[i + j] += *x * *y;
                coef_abs[i + j] += xa * ya;
            }
        }
        let out = Arc::new((coef, coef_abs));
        if self.memoize {
            self.h_cache.insert((a as u16, b as u16), Arc::clone(&out));
        }
        out
    }
}
