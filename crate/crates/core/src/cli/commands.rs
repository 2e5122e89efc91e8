use std::path::Path;

use oampnr::correlators::{
    first_order_scan, g2_classical, oam_map, scan_interference_with, scan_photon_pairs_with, CorrelationMap,
};
use oampnr::fit::fit as run_fit;
use oampnr::fock::joint_pnr_distribution_with;
use oampnr::montecarlo::{compare, estimate_g2_classical, sample_joint_pnr};
use oampnr::output::{pgm, ppm_phase_with_markers, svg_curves, svg_heatmap, Cell, Table};
use oampnr::source::mode_pair_state;
use oampnr::synthesis::{
    far_field, fit_spectrum, intensity_phase_maps, mode_samples, spiral_bandwidth, statistics_from_samples,
};
use oampnr::{Error, Result};

use super::Run;

fn emit(run: &Run, stem: &str, table: &Table) -> Result<()> {
    let path = table.write(&run.out, stem, run.format)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn emit_bytes(run: &Run, name: &str, bytes: &[u8]) -> Result<()> {
    let path = run.out.join(name);
    std::fs::write(&path, bytes)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn emit_svg(run: &Run, stem: &str, body: String) -> Result<()> {
    if run.svg {
        emit_bytes(run, &format!("{stem}.svg"), body.as_bytes())?;
    }
    Ok(())
}

fn map_svg(map: &CorrelationMap, title: &str) -> String {
    svg_heatmap(title, &map.axis1.label, &map.axis2.label, &map.axis1.values, &map.axis2.values, &map.values)
}

pub fn jointpnr(run: &Run, l1: Option<i64>, l2: Option<i64>) -> Result<()> {
    let p = &run.profile;
    let (l1, l2) = (l1.unwrap_or(p.caps.pair[0]), l2.unwrap_or(p.caps.pair[1]));
    let st = mode_pair_state(l1, l2, &p.geometry, &p.source)?;
    let cap = p.caps.photon_cap;
    let d = joint_pnr_distribution_with(&st, p.source.theta, cap, cap, &p.fock)?;
    let mut t = Table::new(&run.digest, &["n", "m", "probability"])
        .meta("command", "jointpnr")
        .meta("l1", l1)
        .meta("l2", l2)
        .meta("theta", p.source.theta)
        .meta("state_digest", &d.params_digest)
        .meta("tail_mass", d.tail_mass)
        .meta("clamped_cells", d.clamped_cells)
        .meta("extended_cells", d.extended_cells);
    for n in 0..=cap {
        for m in 0..=cap {
            t.push(vec![n.into(), m.into(), d.get(n, m).into()]);
        }
    }
    emit(run, "jointpnr", &t)?;
    let xs: Vec<i64> = (0..=cap as i64).collect();
    emit_svg(run, "jointpnr", svg_heatmap(&format!("P(N, M), l = ({l1}, {l2})"), "N", "M", &xs, &xs, &d.probs))?;
    println!("tail_mass {:e} (tolerance {:e})", d.tail_mass, p.fock.tail_tolerance);
    d.check_tail(p.fock.tail_tolerance)
}

pub fn g2map(run: &Run, l_min: Option<i64>, l_max: Option<i64>) -> Result<()> {
    let p = &run.profile;
    let range = l_min.unwrap_or(p.caps.map_range.min)..=l_max.unwrap_or(p.caps.map_range.max);
    if range.is_empty() {
        return Err(Error::Config("empty ℓ range".into()));
    }
    let map = oam_map(&p.geometry, &p.source, range, None, &p.fock)?;
    let mut t = Table::new(&run.digest, &["l1", "l2", "g2"]).meta("command", "g2map");
    for (i, a) in map.axis1.values.iter().enumerate() {
        for (j, b) in map.axis2.values.iter().enumerate() {
            t.push(vec![(*a).into(), (*b).into(), map.values[i][j].into()]);
        }
    }
    emit(run, "g2map", &t)?;
    emit_svg(run, "g2map", map_svg(&map, "classical g2"))
}

pub fn g2tilde_oam(run: &Run, projection: Option<(usize, usize)>) -> Result<()> {
    let p = &run.profile;
    let projections: Vec<(usize, usize)> = match projection {
        Some(x) => vec![x],
        None => p.caps.projections.iter().map(|x| (x[0], x[1])).collect(),
    };
    let mut t = Table::new(&run.digest, &["n1", "n2", "l1", "l2", "g2_tilde"]).meta("command", "g2tilde");
    for &(n1, n2) in &projections {
        let map = oam_map(&p.geometry, &p.source, p.caps.map_range.range(), Some((n1, n2)), &p.fock)?;
        for (i, a) in map.axis1.values.iter().enumerate() {
            for (j, b) in map.axis2.values.iter().enumerate() {
                t.push(vec![n1.into(), n2.into(), (*a).into(), (*b).into(), map.values[i][j].into()]);
            }
        }
        emit_svg(run, &format!("g2tilde_{n1}_{n2}"), map_svg(&map, &format!("g2 tilde ({n1}, {n2})")))?;
    }
    emit(run, "g2tilde_oam", &t)
}

pub fn g2tilde_photons(run: &Run) -> Result<()> {
    let p = &run.profile;
    let [l1, l2] = p.caps.pair;
    let st = mode_pair_state(l1, l2, &p.geometry, &p.source)?;
    let map = scan_photon_pairs_with(&st, p.source.theta, p.caps.n_grid, &p.fock)?;
    let mut t =
        Table::new(&run.digest, &["n1", "n2", "g2_tilde"]).meta("command", "g2tilde").meta("l1", l1).meta("l2", l2);
    for (i, a) in map.axis1.values.iter().enumerate() {
        for (j, b) in map.axis2.values.iter().enumerate() {
            t.push(vec![(*a).into(), (*b).into(), map.values[i][j].into()]);
        }
    }
    emit(run, "g2tilde_photons", &t)?;
    emit_svg(run, "g2tilde_photons", map_svg(&map, &format!("g2 tilde over photon numbers, l = ({l1}, {l2})")))
}

pub fn interference(
    run: &Run,
    l2: Option<i64>,
    l1_min: Option<i64>,
    l1_max: Option<i64>,
    projections: Vec<[usize; 2]>,
) -> Result<()> {
    let p = &run.profile;
    let l2 = l2.unwrap_or(p.caps.l2);
    let range = l1_min.unwrap_or(p.caps.l1_range.min)..=l1_max.unwrap_or(p.caps.l1_range.max);
    if range.is_empty() {
        return Err(Error::Config("empty ℓ1 range".into()));
    }
    let projections = if projections.is_empty() { p.caps.projections.clone() } else { projections };
    let mut scans = vec![(
        "classical".to_string(),
        scan_interference_with(&p.geometry, &p.source, l2, range.clone(), None, 0, &p.fock)?,
    )];
    for [n1, n2] in projections {
        let cap = n1.max(n2);
        let map = scan_interference_with(&p.geometry, &p.source, l2, range.clone(), Some((n1, n2)), cap, &p.fock)?;
        scans.push((format!("{n1}_{n2}"), map));
    }
    let mut t = Table::new(&run.digest, &["series", "l1", "value"]).meta("command", "interference").meta("l2", l2);
    let mut summary =
        Table::new(&run.digest, &["series", "argmax", "visibility"]).meta("command", "interference").meta("l2", l2);
    for (name, map) in &scans {
        for (l1, v) in map.axis1.values.iter().zip(map.curve()) {
            t.push(vec![name.as_str().into(), (*l1).into(), v.into()]);
        }
        summary.push(vec![name.as_str().into(), map.argmax().into(), map.visibility().into()]);
    }
    emit(run, "interference", &t)?;
    emit(run, "interference_summary", &summary)?;
    let series: Vec<(String, Vec<(f64, f64)>)> = scans
        .iter()
        .map(|(name, m)| (name.clone(), m.axis1.values.iter().map(|&l| l as f64).zip(m.curve()).collect()))
        .collect();
    emit_svg(run, "interference", svg_curves(&format!("l2 = {l2}"), "l1", "g2", &series))?;

    let photons = &p.caps.first_order_photons;
    let fo = first_order_scan(&p.geometry, &p.source, range, photons)?;
    let mut cols = vec!["l".to_string(), "mean_photons".to_string()];
    cols.extend(photons.iter().map(|n| format!("p_{n}")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut ft = Table::new(&run.digest, &col_refs).meta("command", "interference");
    for (k, n) in photons.iter().enumerate() {
        ft = ft.meta(&format!("contrast_p_{n}"), fo.contrast(k));
    }
    for (i, l) in fo.l.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(*l).into(), fo.mean_photons[i].into()];
        row.extend(fo.probs.values[i].iter().map(|&v| Cell::from(v)));
        ft.push(row);
    }
    emit(run, "first_order", &ft)?;
    let fseries: Vec<(String, Vec<(f64, f64)>)> = photons
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let peak = fo.probs.values.iter().map(|r| r[k]).fold(0.0, f64::max);
            let pts = fo.l.iter().zip(&fo.probs.values).map(|(&l, r)| (l as f64, r[k] / peak)).collect();
            (format!("P({n}) / max"), pts)
        })
        .collect();
    emit_svg(run, "first_order", svg_curves("single-mode photon statistics", "l", "P(n), normalized", &fseries))?;
    for (name, m) in &scans {
        println!("{name}: argmax {} visibility {:.4}", m.argmax(), m.visibility());
    }
    Ok(())
}

pub fn montecarlo(run: &Run) -> Result<()> {
    let p = &run.profile;
    let mc = p.require_mc()?;
    let [l1, l2] = p.caps.pair;
    let st = mode_pair_state(l1, l2, &p.geometry, &p.source)?;
    let cap = p.caps.photon_cap;
    let theta = p.source.theta;
    let analytic = joint_pnr_distribution_with(&st, theta, cap, cap, &p.fock)?;
    let empirical = sample_joint_pnr(&st, theta, &mc, cap, cap)?;
    let agreement = compare(&analytic, &empirical)?;
    let g2 = g2_classical(&st);
    let est = estimate_g2_classical(&st, theta, &mc)?;
    let g2_ok = (est.value - g2).abs() <= 3.0 * est.stderr;
    let pass = agreement.passes() && g2_ok;

    let mut dist = Table::new(&run.digest, &["n", "m", "analytic", "empirical", "stderr"])
        .meta("command", "montecarlo")
        .meta("state_digest", &analytic.params_digest)
        .meta("samples", mc.sample_count)
        .meta("seed", mc.seed);
    for n in 0..=cap {
        for m in 0..=cap {
            dist.push(vec![
                n.into(),
                m.into(),
                analytic.get(n, m).into(),
                empirical.probability(n, m).into(),
                empirical.stderr_map[n][m].into(),
            ]);
        }
    }
    emit(run, "montecarlo_distribution", &dist)?;
    let mut report = Table::new(&run.digest, &["quantity", "value"])
        .meta("command", "montecarlo")
        .meta("state_digest", &analytic.params_digest);
    let rows: [(&str, Cell); 11] = [
        ("samples", mc.sample_count.to_string().into()),
        ("seed", mc.seed.to_string().into()),
        ("tv_distance", agreement.tv_distance.into()),
        ("aggregate_stderr", agreement.aggregate_stderr.into()),
        ("tv_threshold", (3.0 * agreement.aggregate_stderr).into()),
        ("coverage", agreement.coverage.into()),
        ("overflow", empirical.overflow.to_string().into()),
        ("g2_analytic", g2.into()),
        ("g2_estimate", est.value.into()),
        ("g2_stderr", est.stderr.into()),
        ("verdict", if pass { "PASS" } else { "FAIL" }.into()),
    ];
    for (k, v) in rows {
        report.push(vec![k.into(), v]);
    }
    emit(run, "montecarlo_report", &report)?;
    println!(
        "TV {:.5} vs threshold {:.5}; g2 {:.5} ± {:.5} vs {:.5}: {}",
        agreement.tv_distance,
        3.0 * agreement.aggregate_stderr,
        est.value,
        est.stderr,
        g2,
        if pass { "PASS" } else { "FAIL" }
    );
    if pass {
        Ok(())
    } else {
        Err(Error::Tolerance("Monte Carlo sample disagrees with the analytic distribution".into()))
    }
}

pub fn synthesize(run: &Run, focal: bool) -> Result<()> {
    let p = &run.profile;
    let cfg = p.require_synthesis()?;
    let lmax = p.caps.synthesis_l_max;
    let ls: Vec<i64> = (-lmax..=lmax).collect();
    let samples = mode_samples(&cfg, &ls, Some(&p.geometry))?;
    let stats = samples.iter().map(|s| statistics_from_samples(s, s)).collect::<Result<Vec<_>>>()?;
    let sigma: Vec<f64> = stats.iter().map(|s| s.sigma1).collect();
    let spectrum = fit_spectrum(&ls, &sigma, &p.geometry)?;
    let lambda_hat = spiral_bandwidth(&ls, &sigma);

    let mut t =
        Table::new(&run.digest, &["l", "mu_re", "mu_im", "stderr_mu", "sigma", "stderr_sigma", "intensity_ratio"])
            .meta("command", "synthesize")
            .meta("frames", cfg.frames)
            .meta("seed", cfg.seed)
            .meta("spiral_bandwidth", lambda_hat)
            .meta("fit_eta0", spectrum.eta0)
            .meta("fit_lambda", spectrum.lambda_bw)
            .meta("fit_rms_relative", spectrum.rms_relative);
    for ((l, s), v) in ls.iter().zip(&stats).zip(&samples) {
        let i: Vec<f64> = v.iter().map(|a| a.norm_sqr()).collect();
        let m1 = i.iter().sum::<f64>() / i.len() as f64;
        let m2 = i.iter().map(|x| x * x).sum::<f64>() / i.len() as f64;
        t.push(vec![
            (*l).into(),
            s.mu1.re.into(),
            s.mu1.im.into(),
            s.stderr_mu1.into(),
            s.sigma1.into(),
            s.stderr_sigma1.into(),
            (m2 / (m1 * m1)).into(),
        ]);
    }
    emit(run, "statistics", &t)?;

    let mut c = Table::new(&run.digest, &["l1", "l2", "eta_re", "eta_im", "stderr_eta"]).meta("command", "synthesize");
    for (i, a) in ls.iter().enumerate() {
        for (j, b) in ls.iter().enumerate() {
            let s = statistics_from_samples(&samples[i], &samples[j])?;
            c.push(vec![(*a).into(), (*b).into(), s.eta.re.into(), s.eta.im.into(), s.stderr_eta.into()]);
        }
    }
    emit(run, "covariance", &c)?;

    let frames = (0..cfg.frames.min(16) as u64)
        .map(|k| cfg.frame(k).map(|f| if focal { far_field(&f) } else { f }))
        .collect::<Result<Vec<_>>>()?;
    let maps = intensity_phase_maps(&frames)?;
    let n = maps.grid.n_pixels;
    let peak = maps.mean_intensity.iter().cloned().fold(0.0, f64::max);
    emit_bytes(run, "intensity.pgm", &pgm(n, &maps.mean_intensity, 0.0, peak))?;
    emit_bytes(run, "phase.pgm", &pgm(n, &maps.phase, -std::f64::consts::PI, std::f64::consts::PI))?;
    let marks: Vec<(usize, usize, i32)> = maps.singularities.iter().map(|s| (s.row, s.col, s.charge)).collect();
    emit_bytes(run, "phase_marked.ppm", &ppm_phase_with_markers(n, &maps.phase, &marks))?;
    let mut st = Table::new(&run.digest, &["row", "col", "charge"])
        .meta("command", "synthesize")
        .meta("plane", if focal { "focal" } else { "source" })
        .meta("count", maps.singularities.len())
        .meta("net_charge", maps.net_charge());
    for s in &maps.singularities {
        st.push(vec![s.row.into(), s.col.into(), (s.charge as i64).into()]);
    }
    emit(run, "singularities", &st)?;
    let series = vec![("sigma".to_string(), ls.iter().map(|&l| l as f64).zip(sigma.iter().copied()).collect())];
    emit_svg(run, "statistics", svg_curves("mode variance", "l", "sigma", &series))?;
    println!(
        "spiral bandwidth {lambda_hat:.3}; spectrum fit eta0 {:.4e} lambda {:.2} rms {:.3}; {} singularities",
        spectrum.eta0,
        spectrum.lambda_bw,
        spectrum.rms_relative,
        maps.singularities.len()
    );
    Ok(())
}

pub fn fit(run: &Run) -> Result<()> {
    let p = &run.profile;
    let report = run_fit(&p.geometry, &p.fit.grid, &p.fit.targets, p.source.theta)?;
    let mut t = Table::new(
        &run.digest,
        &[
            "mu0",
            "lambda_bw",
            "zeta",
            "eta0",
            "g2_00",
            "tail_mass_00",
            "classical_argmax",
            "classical_visibility",
            "enhanced",
            "enhanced_argmax",
            "coalescent",
            "coalescent_argmax",
            "structure_failures",
            "residual",
        ],
    )
    .meta("command", "fit");
    let proj = |x: &Option<oampnr::fit::ProjectionPeak>| -> (Cell, Cell) {
        match x {
            Some(pk) => (format!("{}_{}", pk.n1, pk.n2).into(), pk.argmax.into()),
            None => ("".into(), "".into()),
        }
    };
    for pt in &report.evaluated {
        let (e, ea) = proj(&pt.enhanced);
        let (c, ca) = proj(&pt.coalescent);
        let fails: Cell = pt.structure.as_ref().map_or(Cell::from(""), |s| s.failures().into());
        t.push(vec![
            pt.params.mu0.re.into(),
            pt.params.lambda_bw.into(),
            pt.params.zeta.into(),
            pt.params.eta0.into(),
            pt.g2_00.into(),
            pt.tail_mass_00.into(),
            pt.classical_argmax.into(),
            pt.classical_visibility.into(),
            e,
            ea,
            c,
            ca,
            fails,
            pt.residual.into(),
        ]);
    }
    emit(run, "fit_points", &t)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    emit_bytes(run, "fit_report.json", json.as_bytes())?;
    let mut fitted = p.clone();
    fitted.name = "paper_fit".into();
    fitted.source = report.best.params;
    write_profile(run, &run.out.join("paper_fit.json"), &fitted.to_json())?;
    let b = &report.best;
    println!(
        "best mu0 {} eta0 {:.6} lambda {} zeta {}: g2(0,0) {:.4}, residual {:.3e}",
        b.params.mu0, b.params.eta0, b.params.lambda_bw, b.params.zeta, b.g2_00, b.residual
    );
    Ok(())
}

fn write_profile(_run: &Run, path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body)?;
    println!("wrote {}", path.display());
    Ok(())
}
