//! Independent reference computations shared by the integration and
//! acceptance suites. Nothing here calls into the moment machinery.
#![allow(dead_code, clippy::needless_range_loop, clippy::excessive_precision)]

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use oampnr::fock::AbstractedVars;
use oampnr::numeric::gaussian_moment_i;
use oampnr::source::ModePairGaussian;

/// Gauss–Hermite rule for the standard normal law (nodes, weights summing to 1)
/// via the Golub–Welsch eigenproblem.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n).map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// All elements Tr[ρ_out |N,M⟩⟨K,L|] with N, M, K, L ≤ cap, by tensor
/// Gauss–Hermite quadrature of E_P[e^{−|a|²−|b|²} ā^N a^K b̄^M b^L] / √(N!K!M!L!)
/// over the real Gaussian (mean μ, covariance Γ), a = cosθ α, b = i sinθ β.
/// Indexed as `out[n][m][k][l]`.
pub fn quadrature_elements(
    state: &ModePairGaussian,
    theta: f64,
    cap: usize,
    nodes: usize,
) -> Vec<Vec<Vec<Vec<Complex64>>>> {
    let g = Matrix4::from_fn(|i, j| state.gamma[i][j]);
    let chol = g.cholesky().expect("nondegenerate covariance").l();
    let mean = [state.mu1.re, state.mu1.im, state.mu2.re, state.mu2.im];
    let (x, w) = gauss_hermite(nodes);
    let d = cap + 1;
    let mut acc = vec![Complex64::new(0.0, 0.0); d * d * d * d];
    let (c, s) = (theta.cos(), theta.sin());
    let mut pa = vec![Complex64::new(0.0, 0.0); d];
    let mut pac = vec![Complex64::new(0.0, 0.0); d];
    let mut pb = vec![Complex64::new(0.0, 0.0); d];
    let mut pbc = vec![Complex64::new(0.0, 0.0); d];
    for i0 in 0..nodes {
        for i1 in 0..nodes {
            for i2 in 0..nodes {
                for i3 in 0..nodes {
                    let z = [x[i0], x[i1], x[i2], x[i3]];
                    let wt = w[i0] * w[i1] * w[i2] * w[i3];
                    let mut v = mean;
                    for r in 0..4 {
                        for q in 0..=r {
                            v[r] += chol[(r, q)] * z[q];
                        }
                    }
                    let a = Complex64::new(v[0], v[1]) * c;
                    let b = Complex64::new(v[2], v[3]) * Complex64::new(0.0, s);
                    let weight = wt * (-(a.norm_sqr() + b.norm_sqr())).exp();
                    pa[0] = Complex64::new(1.0, 0.0);
                    pac[0] = pa[0];
                    pb[0] = pa[0];
                    pbc[0] = pa[0];
                    for k in 1..d {
                        pa[k] = pa[k - 1] * a;
                        pac[k] = pac[k - 1] * a.conj();
                        pb[k] = pb[k - 1] * b;
                        pbc[k] = pbc[k - 1] * b.conj();
                    }
                    for n in 0..d {
                        for m in 0..d {
                            let left = pac[n] * pbc[m] * weight;
                            for k in 0..d {
                                let lk = left * pa[k];
                                let base = ((n * d + m) * d + k) * d;
                                for l in 0..d {
                                    acc[base + l] += lk * pb[l];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut out = vec![vec![vec![vec![Complex64::new(0.0, 0.0); d]; d]; d]; d];
    for n in 0..d {
        for m in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let norm = (factorial(n) * factorial(m) * factorial(k) * factorial(l)).sqrt();
                    out[n][m][k][l] = acc[((n * d + m) * d + k) * d + l] / norm;
                }
            }
        }
    }
    out
}

/// ∫ P e^{−cos²θ|α|²−sin²θ|β|²} α1ⁿ α2ᵐ β1ᵏ β2ˡ by tensor Gauss–Hermite.
pub fn quadrature_f(state: &ModePairGaussian, theta: f64, e: [u32; 4], nodes: usize) -> f64 {
    let g = Matrix4::from_fn(|i, j| state.gamma[i][j]);
    let chol = g.cholesky().expect("nondegenerate covariance").l();
    let mean = [state.mu1.re, state.mu1.im, state.mu2.re, state.mu2.im];
    let (x, w) = gauss_hermite(nodes);
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    let mut total = 0.0;
    for i0 in 0..nodes {
        for i1 in 0..nodes {
            for i2 in 0..nodes {
                for i3 in 0..nodes {
                    let z = [x[i0], x[i1], x[i2], x[i3]];
                    let mut v = mean;
                    for r in 0..4 {
                        for q in 0..=r {
                            v[r] += chol[(r, q)] * z[q];
                        }
                    }
                    let damp = (-(c2 * (v[0] * v[0] + v[1] * v[1]) + s2 * (v[2] * v[2] + v[3] * v[3]))).exp();
                    let poly = v[0].powi(e[0] as i32)
                        * v[1].powi(e[1] as i32)
                        * v[2].powi(e[2] as i32)
                        * v[3].powi(e[3] as i32);
                    total += w[i0] * w[i1] * w[i2] * w[i3] * damp * poly;
                }
            }
        }
    }
    total
}

fn multinomial(n: usize, parts: &[usize]) -> f64 {
    let mut r = factorial(n);
    let mut used = 0;
    for &p in parts {
        r /= factorial(p);
        used += p;
    }
    r / factorial(n - used)
}

/// f(n, m, k, l) as the literal six-index multinomial sum over
/// β1ᵏ = (k11 A1 + k12 A2 + B1)ᵏ and β2ˡ = (k21 A1 + k22 A2 + B2)ˡ with four
/// unnormalized Gaussian integrals per term, times e^{−C}/(4π²D).
pub fn literal_f(v: &AbstractedVars, state: &ModePairGaussian, n: usize, m: usize, k: usize, l: usize) -> f64 {
    let zb = v.z1;
    let kk = [[v.y1 / zb, v.y2 / zb], [-v.y2 / zb, v.y1 / zb]];
    let mut total = 0.0;
    for c1 in 0..=k {
        for c2 in 0..=k - c1 {
            let c3 = k - c1 - c2;
            for d1 in 0..=l {
                for d2 in 0..=l - d1 {
                    let d3 = l - d1 - d2;
                    let coef = multinomial(k, &[c1, c2])
                        * multinomial(l, &[d1, d2])
                        * kk[0][0].powi(c1 as i32)
                        * kk[0][1].powi(c2 as i32)
                        * kk[1][0].powi(d1 as i32)
                        * kk[1][1].powi(d2 as i32);
                    if coef == 0.0 {
                        continue;
                    }
                    total += coef
                        * gaussian_moment_i(n + c1 + d1, v.z0, v.u1).unwrap()
                        * gaussian_moment_i(m + c2 + d2, v.z0, v.u2).unwrap()
                        * gaussian_moment_i(c3, zb, v.v1).unwrap()
                        * gaussian_moment_i(d3, zb, v.v2).unwrap();
                }
            }
        }
    }
    let det = state.determinant();
    total * (-v.c).exp() / (4.0 * std::f64::consts::PI.powi(2) * det)
}

/// ₁F₁(a; b; z) by its power series with compensated accumulation.
pub fn hyp1f1(a: f64, b: f64, z: f64) -> f64 {
    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut term = 1.0;
    for k in 0..2000 {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * z / (kf + 1.0);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn gamma_half_integer(n2: usize) -> f64 {
    // Γ(n2/2) for positive integer n2
    if n2.is_multiple_of(2) {
        factorial(n2 / 2 - 1)
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while (2.0 * x) as usize != n2 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// I(n, a, b) from the confluent-hypergeometric closed form
/// ∫ xⁿ e^{−ax²−bx} dx = Σ over parity of Γ-weighted ₁F₁(·; ·; b²/4a) terms.
pub fn moment_hypergeometric(n: usize, a: f64, b: f64) -> f64 {
    let z = b * b / (4.0 * a);
    let nf = n as f64;
    let even = if n.is_multiple_of(2) { 1.0 } else { 0.0 };
    let odd = 1.0 - even;
    // even part: a^{-(n+1)/2} Γ((n+1)/2) ₁F₁(−n/2; 1/2; −z), times e^{z}
    // odd part: −b a^{-(n+2)/2} Γ((n+2)/2) ₁F₁((1−n)/2; 3/2; −z), times e^{z}
    let ez = z.exp();
    let e_part = a.powf(-(nf + 1.0) / 2.0) * gamma_half_integer(n + 1) * hyp1f1(-nf / 2.0, 0.5, -z);
    let o_part = -b * a.powf(-(nf + 2.0) / 2.0) * gamma_half_integer(n + 2) * hyp1f1((1.0 - nf) / 2.0, 1.5, -z);
    ez * (even * e_part + odd * o_part)
}

/// Adaptive Gauss–Kronrod (7–15) integration on [lo, hi].
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, rel: f64) -> f64 {
    const XK: [f64; 8] = [
        0.991455371120812639,
        0.949107912342758525,
        0.864864423359769073,
        0.741531185599394440,
        0.586087235467691130,
        0.405845151377397167,
        0.207784955007898468,
        0.0,
    ];
    const WK: [f64; 8] = [
        0.022935322010529225,
        0.063092092629978553,
        0.104790010322250184,
        0.140653259715525919,
        0.169004726639267903,
        0.190350578064785410,
        0.204432940075298892,
        0.209482141084727828,
    ];
    const WG: [f64; 4] = [0.129484966168869693, 0.279705391489276668, 0.381830050505118945, 0.417959183673469388];
    fn gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WK[7] * fc;
        let mut g = WG[3] * fc;
        for i in 0..7 {
            let s = f(c - h * XK[i]) + f(c + h * XK[i]);
            k += WK[i] * s;
            if i % 2 == 1 {
                g += WG[i / 2] * s;
            }
        }
        (k * h, (k - g).abs() * h)
    }
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, e) = gk(f, a, b);
        // stop at round-off: a tolerance below it would recurse to the depth limit
        if e <= tol.max(8.0 * f64::EPSILON * v.abs()) || depth > 40 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, tol / 2.0, depth + 1) + rec(f, m, b, tol / 2.0, depth + 1)
    }
    let (est, _) = gk(f, lo, hi);
    let scale = {
        // magnitude estimate from a coarse absolute integral
        let n = 200;
        let h = (hi - lo) / n as f64;
        (0..n).map(|i| f(lo + (i as f64 + 0.5) * h).abs() * h).sum::<f64>().max(est.abs())
    };
    // Pre-split so that narrow peaks are resolved before error control.
    let pieces = 64;
    let h = (hi - lo) / pieces as f64;
    (0..pieces).map(|i| rec(f, lo + i as f64 * h, lo + (i + 1) as f64 * h, rel * scale * 1e-2 / pieces as f64, 0)).sum()
}

/// Bose–Einstein law n̄ⁿ/(1+n̄)ⁿ⁺¹.
pub fn thermal_law(nbar: f64, n: usize) -> f64 {
    nbar.powi(n as i32) / (1.0 + nbar).powi(n as i32 + 1)
}

/// Deterministic pseudo-random nondegenerate pair for oracle comparisons.
pub fn random_state(seed: u64) -> ModePairGaussian {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let s1: f64 = rng.gen_range(0.15..0.6);
    let s2 = rng.gen_range(0.15..0.6);
    let rho = rng.gen_range(0.0..0.85) * (s1 * s2).sqrt();
    let ph = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    ModePairGaussian::from_moments(
        seed as i64,
        seed as i64 + 1,
        Complex64::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)),
        Complex64::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)),
        s1,
        s2,
        Complex64::from_polar(rho, ph),
        1e-14,
    )
    .unwrap()
}
