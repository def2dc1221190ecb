//! Minimal self-contained SVG line charts.

use std::fmt::Write as _;

use super::experiment::EstimateRow;
use crate::error::{Error, Result};

/// One curve; `half_band` (if any) holds the shaded half-width per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub half_band: Option<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { name: name.into(), points, half_band: None }
    }
}

/// Which row field goes on the horizontal axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    B,
    Tau,
}

/// Groups rows into series along `x`, with `2 * std_err` bands.
/// Rows with a NaN ratio are left out.
pub fn rows_to_series(rows: &[EstimateRow], x: XAxis) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in rows.iter().filter(|r| r.ratio.is_finite()) {
        let (xv, key) = match x {
            XAxis::B => (r.b as f64, format!("{} n={} tau={}", r.algorithm, r.n, r.tau)),
            XAxis::Tau => (r.tau, format!("{} n={} B={}", r.algorithm, r.n, r.b)),
        };
        let idx = match out.iter().position(|s| s.name == key) {
            Some(i) => i,
            None => {
                out.push(Series { name: key, points: Vec::new(), half_band: Some(Vec::new()) });
                out.len() - 1
            }
        };
        out[idx].points.push((xv, r.ratio));
        if let Some(b) = out[idx].half_band.as_mut() {
            b.push(2.0 * r.std_err);
        }
    }
    out
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the series as an SVG document.
pub fn render_svg(series: &[Series], x_label: &str, y_label: &str, bands: bool) -> Result<String> {
    let pts = series.iter().flat_map(|s| s.points.iter());
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::param("nothing to plot"));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if bands {
        for s in series {
            if let Some(b) = &s.half_band {
                for (&(_, y), h) in s.points.iter().zip(b) {
                    y0 = y0.min(y - h);
                    y1 = y1.max(y + h);
                }
            }
        }
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);

    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (70.0, 220.0, 20.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(fx),
            top + ph + 16.0,
            short(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            sy(fy) + 4.0,
            short(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if bands {
            if let Some(b) = &ser.half_band {
                if b.len() == ser.points.len() && !ser.points.is_empty() {
                    let upper = ser.points.iter().zip(b).map(|(&(x, y), h)| (x, y + h));
                    let lower = ser.points.iter().zip(b).rev().map(|(&(x, y), h)| (x, y - h));
                    let poly: Vec<String> =
                        upper.chain(lower).map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                    let _ = writeln!(
                        s,
                        r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                        poly.join(" ")
                    );
                }
            }
        }
        let line: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            line.join(" ")
        );
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, lx + 26.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn short(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.to_string()
    }
}
