//! Minimal SVG output: overlaid step histograms and x–y curves.

use std::fmt::Write as _;
use std::path::Path;

use log::warn;

use crate::stats::Histogram;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// How a curve series is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Dots,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, xlabel: &str, ylabel: &str, f: &Frame) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>
"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        escape(title)
    );
    let (l, r, t, b) = (MARGIN_L, WIDTH - MARGIN_R, MARGIN_T, HEIGHT - MARGIN_B);
    let _ = writeln!(out, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    for i in 0..=4 {
        let x = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let y = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#, f.px(x), b + 16.0, x);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#, l - 6.0, f.py(y) + 4.0, y);
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (l + r) / 2.0, HEIGHT - 10.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(ylabel)
    );
}

fn legend(out: &mut String, labels: &[&str]) {
    for (i, label) in labels.iter().enumerate() {
        let y = MARGIN_T + 14.0 + 18.0 * i as f64;
        let x = WIDTH - MARGIN_R + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x + 20.0,
            COLORS[i % COLORS.len()],
            x + 26.0,
            y + 4.0,
            escape(label)
        );
    }
}

/// Overlaid density step histograms sharing one x range.
pub fn histograms_svg(series: &[(&str, &Histogram)], title: &str, xlabel: &str) -> String {
    let x0 = series.iter().map(|(_, h)| h.edges()[0]).fold(f64::INFINITY, f64::min);
    let x1 = series.iter().map(|(_, h)| *h.edges().last().unwrap()).fold(f64::NEG_INFINITY, f64::max);
    let ymax = series.iter().flat_map(|(_, h)| h.densities()).fold(0.0, f64::max);
    let frame = Frame {
        x0: if x0.is_finite() { x0 } else { 0.0 },
        x1: if x1.is_finite() && x1 > x0 { x1 } else { 1.0 },
        y0: 0.0,
        y1: if ymax > 0.0 { ymax * 1.1 } else { 1.0 },
    };
    let mut out = String::new();
    header(&mut out, title, xlabel, "density", &frame);
    for (i, (_, h)) in series.iter().enumerate() {
        let d = h.densities();
        let e = h.edges();
        let mut pts = format!("{:.2},{:.2}", frame.px(e[0]), frame.py(0.0));
        for (k, &v) in d.iter().enumerate() {
            let _ = write!(pts, " {:.2},{:.2} {:.2},{:.2}", frame.px(e[k]), frame.py(v), frame.px(e[k + 1]), frame.py(v));
        }
        let _ = write!(pts, " {:.2},{:.2}", frame.px(*e.last().unwrap()), frame.py(0.0));
        let _ = writeln!(out, r#"<polyline points="{pts}" fill="none" stroke="{}" stroke-width="1.5"/>"#, COLORS[i % COLORS.len()]);
    }
    legend(&mut out, &series.iter().map(|(l, _)| *l).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Curves or point sets on common axes.
pub fn curves_svg(series: &[(&str, &[(f64, f64)], Style)], title: &str, xlabel: &str, ylabel: &str) -> String {
    let pts = series.iter().flat_map(|(_, p, _)| p.iter());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x0 -= 0.5;
        x1 = x0 + 1.0;
    }
    let frame = Frame { x0, x1, y0: 0.0, y1: if y1 > 0.0 { y1 * 1.1 } else { 1.0 } };
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel, &frame);
    for (i, (_, p, style)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        match style {
            Style::Line => {
                let list: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))).collect();
                let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, list.join(" "));
            }
            Style::Dots => {
                for &(x, y) in p.iter() {
                    let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, frame.px(x), frame.py(y));
                }
            }
        }
    }
    legend(&mut out, &series.iter().map(|(l, _, _)| *l).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Writes an SVG, logging instead of failing.
pub fn save(path: &Path, svg: &str) {
    if let Err(e) = std::fs::write(path, svg) {
        warn!("could not write plot {}: {e}", path.display());
    }
}
