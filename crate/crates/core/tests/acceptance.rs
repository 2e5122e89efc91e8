//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Reference values come from the oracles in `common`, not
//! from the code under test.

#![allow(clippy::needless_range_loop)]

mod common;

use std::f64::consts::FRAC_PI_4;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use num_complex::Complex64;
use oampnr::correlators::{
    first_order_scan, g2_classical, g2_multiphoton_with, oam_map, scan_interference, scan_photon_pairs, CorrelationMap,
};
use oampnr::fock::{arm_marginal, joint_pnr_distribution, joint_pnr_distribution_with, FockConfig, FockEvaluator};
use oampnr::montecarlo::{compare, estimate_g2_classical, sample_joint_pnr, McConfig};
use oampnr::numeric::gaussian_moment_i;
use oampnr::profile::RunProfile;
use oampnr::source::{mode_pair_state, ModePairGaussian, SlitGeometry};
use oampnr::synthesis::*;
use rand::{Rng, SeedableRng};

type Verdict = (bool, String);

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let c: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    c / (va * vb).sqrt()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn normalization(p: &RunProfile) -> Verdict {
    let st = mode_pair_state(0, 0, &p.geometry, &p.source).unwrap();
    let t = Instant::now();
    let d = single_threaded(|| joint_pnr_distribution(&st, FRAC_PI_4, 20, 20).unwrap());
    let el = t.elapsed();
    let total = d.total();
    let ok = total >= 1.0 - 1e-6 && el < Duration::from_secs(600);
    (ok, format!("sum over N,M <= 20 = {total:.12} (1 - {:.2e}), {el:.2?} on one thread", 1.0 - total))
}

fn thermal() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut g2_err: f64 = 0.0;
    for (sigma, theta) in [(0.3, FRAC_PI_4), (1.1, 0.5), (2.0, 1.2)] {
        let st = ModePairGaussian::single_mode(0, Complex64::default(), sigma).unwrap();
        let nbar = 2.0 * sigma * f64::cos(theta).powi(2);
        let p = arm_marginal(&st, theta, 1, 15, &FockConfig::default()).unwrap();
        for (n, v) in p.iter().enumerate() {
            worst = worst.max(rel(*v, thermal_law(nbar, n)));
        }
        g2_err = g2_err.max((g2_classical(&st) - 2.0).abs());
    }
    (worst < 1e-9 && g2_err < 1e-15, format!("max relative error {worst:.2e} over N <= 15; |g2 - 2| = {g2_err:.1e}"))
}

fn factorized() -> Verdict {
    let st = ModePairGaussian::from_moments(
        0,
        4,
        Complex64::new(0.6, -0.2),
        Complex64::new(-0.3, 0.5),
        0.45,
        0.3,
        Complex64::default(),
        1e-14,
    )
    .unwrap();
    let cfg = FockConfig { factorized_fast_path: false, ..FockConfig::default() };
    let theta = 0.6;
    let d = joint_pnr_distribution_with(&st, theta, 8, 8, &cfg).unwrap();
    let a = arm_marginal(&st, theta, 1, 8, &cfg).unwrap();
    let b = arm_marginal(&st, theta, 2, 8, &cfg).unwrap();
    let mut prod: f64 = 0.0;
    for n in 0..=8 {
        for m in 0..=8 {
            prod = prod.max(rel(d.get(n, m), a[n] * b[m]));
        }
    }
    let mut tilde: f64 = 0.0;
    for n1 in 0..=5 {
        for n2 in 0..=5 {
            tilde = tilde.max((g2_multiphoton_with(&st, theta, n1, n2, 5, &cfg).unwrap() - 1.0).abs());
        }
    }
    let g2 = (g2_classical(&st) - 1.0).abs();
    (
        prod < 1e-9 && tilde < 1e-9 && g2 == 0.0,
        format!("joint vs product {prod:.2e}; max |g2~ - 1| {tilde:.2e}; |g2 - 1| = {g2:.1e}"),
    )
}

fn quadrature() -> Verdict {
    let mut worst: f64 = 0.0;
    for (seed, theta) in [(21u64, FRAC_PI_4), (22, 0.4), (23, 1.1)] {
        let st = random_state(seed);
        let q = quadrature_elements(&st, theta, 3, 36);
        let mut ev = FockEvaluator::new(&st, theta, 3, &FockConfig::default()).unwrap();
        for n in 0..=3 {
            for m in 0..=3 {
                for k in 0..=3 {
                    for l in 0..=3 {
                        let a = ev.element(n, m, k, l).unwrap();
                        let r = q[n][m][k][l];
                        worst = worst.max((a - r).norm() / r.norm().max(1e-12));
                    }
                }
            }
        }
    }
    (worst < 1e-6, format!("max relative deviation {worst:.2e} over 3 states x 256 elements"))
}

fn monte_carlo(p: &RunProfile) -> Verdict {
    let st = mode_pair_state(0, 3, &p.geometry, &p.source).unwrap();
    let cfg = McConfig::new(1_000_000, 2024);
    let a = joint_pnr_distribution(&st, FRAC_PI_4, 20, 20).unwrap();
    let e = sample_joint_pnr(&st, FRAC_PI_4, &cfg, 20, 20).unwrap();
    let ag = compare(&a, &e).unwrap();
    let g = estimate_g2_classical(&st, FRAC_PI_4, &cfg).unwrap();
    let exact = g2_classical(&st);
    let ok = ag.passes() && (g.value - exact).abs() < 3.0 * g.stderr;
    (
        ok,
        format!(
            "(0,3): TV {:.4} < {:.4}; g2 {:.4} +- {:.4} vs {:.4}",
            ag.tv_distance,
            3.0 * ag.aggregate_stderr,
            g.value,
            g.stderr,
            exact
        ),
    )
}

fn anchor(out: &Path) -> (Verdict, Option<RunProfile>) {
    let status = Command::new(env!("CARGO_BIN_EXE_oampnr")).args(["fit", "--out"]).arg(out).output().expect("fit runs");
    if !status.status.success() {
        return ((false, format!("fit exited with {:?}", status.status.code())), None);
    }
    let p = RunProfile::load(&out.join("paper_fit.json")).unwrap();
    let st = mode_pair_state(0, 0, &p.geometry, &p.source).unwrap();
    let g2 = g2_classical(&st);
    let s = &p.source;
    (
        (
            (g2 - 1.74).abs() <= 0.05,
            format!(
                "g2(0,0) = {g2:.6} at mu0 = {}, eta0 = {:.6}, lambda = {}, zeta = {}",
                s.mu0, s.eta0, s.lambda_bw, s.zeta
            ),
        ),
        Some(p),
    )
}

fn argmax_structure(p: &RunProfile) -> Verdict {
    let (g, s) = (&p.geometry, &p.source);
    let classical = scan_interference(g, s, 3, -15..=15, None, 0).unwrap();
    let origin = scan_photon_pairs(&mode_pair_state(0, 0, g, s).unwrap(), s.theta, 7).unwrap();
    let (mut enhanced, mut coalescent) = (Vec::new(), Vec::new());
    for n1 in 0..=7 {
        for n2 in 0..=7 {
            let scan = scan_interference(g, s, 3, -15..=15, Some((n1, n2)), 7).unwrap();
            let class = origin.values[n1][n2];
            if class > 1.0 && scan.argmax() == 3 && scan.visibility() >= classical.visibility() {
                enhanced.push(format!("({n1},{n2}) vis {:.3}", scan.visibility()));
            }
            if class < 1.0 && scan.argmax() == -3 {
                coalescent.push(format!("({n1},{n2})"));
            }
        }
    }
    let ok = classical.argmax() == 3 && !enhanced.is_empty() && !coalescent.is_empty();
    (
        ok,
        format!(
            "classical argmax {} vis {:.3}; enhanced at 3: {}; coalescent at -3: {}",
            classical.argmax(),
            classical.visibility(),
            if enhanced.is_empty() { "none".into() } else { enhanced[..enhanced.len().min(3)].join(", ") },
            if coalescent.is_empty() { "none".into() } else { coalescent.join(", ") },
        ),
    )
}

fn peak(map: &CorrelationMap) -> (f64, bool) {
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for (i, row) in map.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if *v > best.0 {
                best = (*v, i, j);
            }
        }
    }
    (best.0, best.1 == best.2)
}

fn max_diagonal(map: &CorrelationMap) -> f64 {
    (0..map.values.len()).map(|i| map.values[i][i]).fold(f64::NEG_INFINITY, f64::max)
}

fn oam_maps(p: &RunProfile) -> Verdict {
    let m = |n1, n2| oam_map(&p.geometry, &p.source, -5..=5, Some((n1, n2)), &p.fock).unwrap();
    let (p44, d44) = peak(&m(4, 4));
    let (p77, d77) = peak(&m(7, 7));
    let h14 = max_diagonal(&m(1, 4));
    let h17 = max_diagonal(&m(1, 7));
    let ok = d44 && d77 && p77 > p44 && h14 < 1.0 && h17 < 1.0;
    (
        ok,
        format!(
            "(4,4) peak {p44:.4} diagonal {d44}; (7,7) peak {p77:.4} diagonal {d77}; max diagonal (1,4) {h14:.4}, (1,7) {h17:.4}"
        ),
    )
}

fn single_mode(p: &RunProfile) -> Verdict {
    let scan = first_order_scan(&p.geometry, &p.source, -15..=15, &[0, 4, 7]).unwrap();
    let i0 = scan.l.iter().position(|&l| l == 0).unwrap();
    let p0: Vec<f64> = scan.probs.values.iter().map(|r| r[0]).collect();
    let dip = p0[i0] < p0[i0 - 1] && p0[i0] < p0[i0 + 1];
    let (c4, c7) = (scan.contrast(1), scan.contrast(2));
    (dip && c7 > c4, format!("P(0) local minimum at 0: {dip}; contrast P(4) {c4:.4}, P(7) {c7:.4}"))
}

fn special_functions() -> Verdict {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
    let mut quad: f64 = 0.0;
    for _ in 0..150 {
        let n = rng.gen_range(0..=12usize);
        let a: f64 = rng.gen_range(0.2..4.0);
        let b = rng.gen_range(0.25..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let c = -b / (2.0 * a);
        let half = 12.0 / a.sqrt() + (n as f64 / a).sqrt() * 3.0;
        let q = adaptive_quad(&|x: f64| x.powi(n as i32) * (-a * x * x - b * x).exp(), c - half, c + half, 1e-13);
        quad = quad.max(rel(gaussian_moment_i(n, a, b).unwrap(), q));
    }
    let mut hyp: f64 = 0.0;
    for _ in 0..150 {
        let n = rng.gen_range(0..=10usize);
        let a: f64 = rng.gen_range(0.2..4.0);
        let b = rng.gen_range(-3.0..3.0);
        let h = moment_hypergeometric(n, a, b);
        hyp = hyp.max((gaussian_moment_i(n, a, b).unwrap() - h).abs() / h.abs().max(1e-300));
    }
    (
        quad < 1e-10 && hyp < 1e-8,
        format!("vs adaptive quadrature {quad:.2e} (150 draws); vs 1F1 form {hyp:.2e} (150 draws)"),
    )
}

fn synthesis() -> Verdict {
    let w0 = 1.0;
    let grid = GridSpec::new(256, 8.0 * w0).unwrap();

    let offsets = [1usize, 2, 3, 5, 7, 10];
    let screens: Vec<Vec<f64>> = (0..200).map(|k| kolmogorov_screen_stream(&grid, 0.25 * w0, 31, k).unwrap()).collect();
    let d = structure_function(&screens, &grid, &offsets);
    let x: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
    let slope = log_log_slope(&x, &d);
    let slope_ok = (slope - 5.0 / 3.0).abs() <= 0.15;

    let ls: Vec<i64> = (-5..=5).collect();
    let cfg = SynthesisConfig {
        grid,
        w0,
        r0: 0.25 * w0,
        frames: 1000,
        coherent_bias: 0.0,
        basis: RadialBasis::Gaussian,
        seed: 32,
    };
    let samples = mode_samples(&cfg, &ls, None).unwrap();
    let ratios: Vec<f64> = samples
        .iter()
        .map(|v| {
            let i: Vec<f64> = v.iter().map(|a| a.norm_sqr()).collect();
            let m1 = i.iter().sum::<f64>() / i.len() as f64;
            let m2 = i.iter().map(|x| x * x).sum::<f64>() / i.len() as f64;
            m2 / (m1 * m1)
        })
        .collect();
    let ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let (rmin, rmax) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let ratio_ok = (ratio - 2.0).abs() <= 0.1;

    let geom = SlitGeometry::paper_double_slit();
    let shape_ls: Vec<i64> = (-12..=12).collect();
    let closed: Vec<f64> = shape_ls
        .iter()
        .map(|&l| {
            let h = geom.width * l as f64 / 2.0;
            let sinc = if h == 0.0 { 1.0 } else { h.sin() / h };
            ((geom.separation * l as f64 / 2.0).cos() * sinc).abs()
        })
        .collect();
    let biased = SynthesisConfig { coherent_bias: 0.5, frames: 500, seed: 33, ..cfg };
    let mean: Vec<f64> = mode_samples(&biased, &shape_ls, Some(&geom))
        .unwrap()
        .iter()
        .map(|v| (v.iter().sum::<Complex64>() / v.len() as f64).norm())
        .collect();
    let shape = pearson(&mean, &closed);
    let shape_ok = shape >= 0.99;
    let beam = FieldFrame { grid, values: lg_mode(0, 0, &grid, w0).unwrap(), frame_id: 0 };
    let sector: Vec<f64> = oam_power_spectrum(&beam, &shape_ls, Some(&geom)).iter().map(|p| p.sqrt()).collect();
    let laguerre: Vec<f64> =
        shape_ls.iter().map(|&l| project_onto_oam(&beam, l, DEFAULT_P_MAX, w0, Some(&geom)).unwrap().norm()).collect();

    (
        slope_ok && ratio_ok && shape_ok,
        format!(
            "structure exponent {slope:.3} [{}]; <I^2>/<I>^2 {ratio:.3} over |l| <= 5 (per mode {rmin:.2}..{rmax:.2}) [{}]; \
             mu_l shape r = {shape:.4} [{}] (sector power {:.4}, Laguerre sum p <= {DEFAULT_P_MAX} {:.3})",
            ok_word(slope_ok),
            ok_word(ratio_ok),
            ok_word(shape_ok),
            pearson(&sector, &closed),
            pearson(&laguerre, &closed),
        ),
    )
}

fn performance(p: &RunProfile) -> Verdict {
    let st = mode_pair_state(0, 3, &p.geometry, &p.source).unwrap();
    let time = |memoize: bool| {
        let cfg = FockConfig { memoize, ..FockConfig::default() };
        single_threaded(|| {
            let t = Instant::now();
            let d = joint_pnr_distribution_with(&st, FRAC_PI_4, 12, 12, &cfg).unwrap();
            (t.elapsed(), d)
        })
    };
    let (on, d_on) = time(true);
    let (off, d_off) = time(false);
    let speedup = off.as_secs_f64() / on.as_secs_f64();
    let same = d_on.probs == d_off.probs;
    (
        speedup >= 5.0 && same,
        format!("cap 12: {on:.2?} memoized, {off:.2?} without, speedup {speedup:.1}x; identical: {same}"),
    )
}

fn ok_word(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "out of tolerance"
    }
}

fn main() {
    // `cargo test -- <filter>` and `--list` pass arguments; only run unfiltered
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    if args.iter().any(|a| !a.starts_with('-') && !"acceptance".contains(a.as_str())) {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let built_in = RunProfile::paper_fit();
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut record = |n: u32, name: &'static str, v: Verdict| {
        println!("criterion {n:>2} {name:<22} {} {}", if v.0 { "PASS" } else { "FAIL" }, v.1);
        results.push((n, name, v));
    };
    record(1, "normalization", normalization(&built_in));
    record(2, "thermal oracle", thermal());
    record(3, "factorized oracle", factorized());
    record(4, "quadrature oracle", quadrature());
    record(5, "monte carlo", monte_carlo(&built_in));
    let (v6, fitted) = anchor(dir.path());
    record(6, "g2 anchor 1.74", v6);
    let fitted = fitted.unwrap_or(built_in.clone());
    record(7, "interference argmax", argmax_structure(&fitted));
    record(8, "oam map structure", oam_maps(&fitted));
    record(9, "single-mode structure", single_mode(&fitted));
    record(10, "special functions", special_functions());
    record(11, "synthesis oracle", synthesis());
    record(12, "memoization speedup", performance(&built_in));
    let failed: Vec<u32> = results.iter().filter(|r| !r.2 .0).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria PASS", results.len());
    } else {
        println!("acceptance: FAIL {failed:?}");
        std::process::exit(1);
    }
}
