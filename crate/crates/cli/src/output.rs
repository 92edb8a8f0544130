//! Deterministic CSV and SVG emission.
//!
//! Every file starts with comment lines carrying the config hash and the
//! preset, so any output can be traced to the exact run configuration.
//! Floats are printed with a fixed scientific format to keep reruns
//! byte-identical.

use crate::config::RunConfig;
use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::Path;

pub fn fmt_f(v: f64) -> String {
    format!("{v:.12e}")
}

pub struct CsvFile {
    text: String,
}

impl CsvFile {
    pub fn new(cfg: &RunConfig, columns: &[&str]) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# config-hash: {:016x}", cfg.hash());
        let _ = writeln!(text, "# preset: {}", cfg.preset.name());
        let _ = writeln!(
            text,
            "# tolerances: tf_tol={:e} orbit_tol={:e}",
            cfg.tf_tol, cfg.orbit_tol
        );
        let _ = writeln!(text, "{}", columns.join(","));
        Self { text }
    }

    pub fn comment(&mut self, line: &str) {
        // comments land after the header row; keep them above the data
        let _ = writeln!(self.text, "# {line}");
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, &self.text)
            .with_context(|| format!("cannot write {}", path.display()))
    }
}

/// One polyline series for the SVG plot.
pub struct Series<'a> {
    pub points: &'a [(f64, f64)],
    pub color: &'a str,
    /// Draw markers instead of a connected line.
    pub scatter: bool,
}

/// Minimal hand-rolled SVG line plot with labeled axes.
pub fn write_svg(
    path: &Path,
    cfg: &RunConfig,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> Result<()> {
    let (w, h) = (720.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let all = series.iter().flat_map(|s| s.points.iter());
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, "<!-- config-hash: {:016x} -->", cfg.hash());
    let _ = writeln!(
        s,
        r#"<rect width="{w}" height="{h}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#,
        w / 2.0
    );
    // axes
    let _ = writeln!(
        s,
        r#"<line x1="{ml}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        h - mb,
        w - mr,
        h - mb
    );
    let _ = writeln!(
        s,
        r#"<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{}" stroke="black"/>"#,
        h - mb
    );
    // ticks: 5 per axis
    for k in 0..=5 {
        let fx = x0 + (x1 - x0) * k as f64 / 5.0;
        let px = sx(fx);
        let _ = writeln!(
            s,
            r#"<line x1="{px}" y1="{}" x2="{px}" y2="{}" stroke="black"/>"#,
            h - mb,
            h - mb + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{px}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{fx:.3}</text>"#,
            h - mb + 18.0
        );
        let fy = y0 + (y1 - y0) * k as f64 / 5.0;
        let py = sy(fy);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{py}" x2="{ml}" y2="{py}" stroke="black"/>"#,
            ml - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{fy:.3}</text>"#,
            ml - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{x_label}</text>"#,
        (ml + w - mr) / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0
    );
    for ser in series {
        if ser.scatter {
            for &(x, y) in ser.points {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                    sx(x),
                    sy(y),
                    ser.color
                );
            }
        } else {
            let pts: Vec<String> = ser
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                ser.color,
                pts.join(" ")
            );
        }
    }
    let _ = writeln!(s, "</svg>");
    std::fs::write(path, s).with_context(|| format!("cannot write {}", path.display()))
}
