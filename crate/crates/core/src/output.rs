//! File writers: tables as CSV or JSON, heatmaps and curves as SVG, field
//! maps as binary PGM/PPM.
//!
//! A CSV table starts with `# key=value` lines (always including `digest`),
//! followed by one header row and the data rows. Floats use the shortest
//! representation that round-trips, so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::profile::OutputFormat;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(digest: &str, columns: &[&str]) -> Self {
        Self {
            meta: vec![("digest".into(), digest.to_string())],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}={v}");
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct View<'a> {
            meta: serde_json::Map<String, serde_json::Value>,
            columns: &'a [String],
            rows: &'a [Vec<Cell>],
        }
        let meta = self.meta.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
        serde_json::to_string_pretty(&View { meta, columns: &self.columns, rows: &self.rows })
            .expect("table serializes")
    }

    /// Writes `<dir>/<stem>.csv` or `<dir>/<stem>.json`.
    pub fn write(&self, dir: &Path, stem: &str, format: OutputFormat) -> Result<PathBuf> {
        let (path, body) = match format {
            OutputFormat::Csv => (dir.join(format!("{stem}.csv")), self.to_csv()),
            OutputFormat::Json => (dir.join(format!("{stem}.json")), self.to_json()),
        };
        fs::write(&path, body)?;
        Ok(path)
    }
}

/// Piecewise-linear viridis approximation on t ∈ [0, 1].
fn colormap(t: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, f64, f64); 5] =
        [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (STOPS.len() - 1) as f64;
    let k = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - k as f64;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    (mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn finite_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Heatmap with `values[i][j]` at column `xs[i]`, row `ys[j]` (ys grow upward).
pub fn svg_heatmap(title: &str, x_label: &str, y_label: &str, xs: &[i64], ys: &[i64], values: &[Vec<f64>]) -> String {
    let cell = (360.0 / xs.len().max(ys.len()) as f64).clamp(4.0, 40.0);
    let (w, h) = (cell * xs.len() as f64, cell * ys.len() as f64);
    let (left, top) = (60.0, 40.0);
    let (lo, hi) = finite_range(values.iter().flatten().copied());
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#,
        left + w + 90.0,
        top + h + 50.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{title}</text>"#, left + w / 2.0);
    for (i, col) in values.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            let (r, g, b) = colormap((v - lo) / (hi - lo));
            let y = top + h - (j + 1) as f64 * cell;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{b})"><title>{} {}: {v}</title></rect>"#,
                left + i as f64 * cell,
                y,
                cell,
                cell,
                xs[i],
                ys[j]
            );
        }
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, left + w / 2.0, top + h + 35.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{y_label}</text>"#,
        top + h / 2.0,
        top + h / 2.0
    );
    for (k, x) in [(0, xs.first()), (xs.len() - 1, xs.last())] {
        if let Some(x) = x {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{x}</text>"#,
                left + (k as f64 + 0.5) * cell,
                top + h + 14.0
            );
        }
    }
    for (k, y) in [(0, ys.first()), (ys.len() - 1, ys.last())] {
        if let Some(y) = y {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{y}</text>"#,
                left - 4.0,
                top + h - (k as f64 + 0.5) * cell + 4.0
            );
        }
    }
    // color bar
    let bx = left + w + 20.0;
    for k in 0..50 {
        let (r, g, b) = colormap(1.0 - k as f64 / 49.0);
        let _ = writeln!(
            s,
            r#"<rect x="{bx}" y="{:.2}" width="14" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
            top + k as f64 * h / 50.0,
            h / 50.0 + 0.5
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}">{hi:.4}</text>"#, bx + 18.0, top + 10.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}">{lo:.4}</text>"#, bx + 18.0, top + h);
    s.push_str("</svg>\n");
    s
}

/// Line plot of several named series over a shared x axis.
pub fn svg_curves(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
    let (w, h, left, top) = (480.0, 300.0, 70.0, 40.0);
    let (x0, x1) = finite_range(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let (y0, y1) = finite_range(series.iter().flat_map(|s| s.1.iter().map(|p| p.1)));
    let px = |x: f64| left + (x - x0) / (x1 - x0) * w;
    let py = |y: f64| top + h - (y - y0) / (y1 - y0) * h;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#,
        left + w + 130.0,
        top + h + 50.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{title}</text>"#, left + w / 2.0);
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{left}" y="{}" text-anchor="middle">{x0}</text>"#, top + h + 14.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x1}</text>"#, left + w, top + h + 14.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y0:.4}</text>"#, left - 4.0, top + h);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y1:.4}</text>"#, left - 4.0, top + 10.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, left + w / 2.0, top + h + 35.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{y_label}</text>"#,
        top + h / 2.0,
        top + h / 2.0
    );
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> =
            pts.iter().filter(|p| p.1.is_finite()).map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let ly = top + 12.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            left + w + 10.0,
            left + w + 30.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, left + w + 35.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

fn scale8(v: f64, lo: f64, hi: f64) -> u8 {
    if !v.is_finite() || hi <= lo {
        return 0;
    }
    (((v - lo) / (hi - lo)).clamp(0.0, 1.0) * 255.0).round() as u8
}

/// 8-bit binary PGM of a row-major n×n map whose row 0 is the lowest y; the
/// image is flipped so that +y points up.
pub fn pgm(n: usize, values: &[f64], lo: f64, hi: f64) -> Vec<u8> {
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for i in (0..n).rev() {
        out.extend(values[i * n..(i + 1) * n].iter().map(|&v| scale8(v, lo, hi)));
    }
    out
}

/// Phase map in gray with 3×3 markers at singular plaquettes: red for +1,
/// blue for −1.
pub fn ppm_phase_with_markers(n: usize, phase: &[f64], marks: &[(usize, usize, i32)]) -> Vec<u8> {
    let mut rgb: Vec<[u8; 3]> =
        phase.iter().map(|&p| [scale8(p, -std::f64::consts::PI, std::f64::consts::PI); 3]).collect();
    for &(row, col, charge) in marks {
        let color = if charge > 0 { [230, 20, 20] } else { [20, 60, 230] };
        for di in 0..3usize {
            for dj in 0..3usize {
                let (i, j) = ((row + di).saturating_sub(1), (col + dj).saturating_sub(1));
                if i < n && j < n {
                    rgb[i * n + j] = color;
                }
            }
        }
    }
    let mut out = format!("P6\n{n} {n}\n255\n").into_bytes();
    for i in (0..n).rev() {
        for px in &rgb[i * n..(i + 1) * n] {
            out.extend_from_slice(px);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new("abc", &["n", "m", "probability"]).meta("tail_mass", 1e-9);
        t.push(vec![0usize.into(), 1usize.into(), 0.25.into()]);
        assert_eq!(t.to_csv(), "# digest=abc\n# tail_mass=0.000000001\nn,m,probability\n0,1,0.25\n");
    }

    #[test]
    fn json_layout_keeps_numbers() {
        let mut t = Table::new("abc", &["l", "g2"]);
        t.push(vec![(-3i64).into(), 1.5.into()]);
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["meta"]["digest"], "abc");
        assert_eq!(v["rows"][0][0], -3);
        assert_eq!(v["rows"][0][1], 1.5);
    }

    #[test]
    fn pgm_header_and_flip() {
        let img = pgm(2, &[0.0, 0.0, 1.0, 1.0], 0.0, 1.0);
        assert_eq!(&img[..11], b"P5\n2 2\n255\n");
        assert_eq!(&img[11..], &[255, 255, 0, 0]);
    }

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), (68, 1, 84));
        assert_eq!(colormap(1.0), (253, 231, 37));
        assert_eq!(colormap(f64::NAN), (68, 1, 84));
    }
}
