//! Hand-rolled static SVG plots.
//!
//! Every plot is a derived artifact: the CSV next to it holds all plotted
//! values, and the SVG is rebuilt deterministically from the same data (all
//! coordinates fixed-precision, no timestamps, no external renderer).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use spdgeo::Result;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log10,
}

#[derive(Clone, Copy)]
pub enum Marker {
    Circle,
    Diamond,
    Triangle,
    Square,
    Plus,
    Cross,
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub marker: Marker,
    pub color: &'static str,
    pub line: bool,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
}

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 58.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 46.0;

struct Axis {
    scale: Scale,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(scale: Scale, values: impl Iterator<Item = f64>) -> Axis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            let v = match scale {
                Scale::Linear => v,
                Scale::Log10 => {
                    if v <= 0.0 {
                        continue;
                    }
                    v.log10()
                }
            };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Axis {
            scale,
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn unit(&self, v: f64) -> Option<f64> {
        let v = match self.scale {
            Scale::Linear => v,
            Scale::Log10 => {
                if v <= 0.0 {
                    return None;
                }
                v.log10()
            }
        };
        Some((v - self.lo) / (self.hi - self.lo))
    }

    /// Tick positions in data units of the transformed axis (plain values
    /// for linear, exponents for log).
    fn ticks(&self) -> Vec<f64> {
        let span = self.hi - self.lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|&s| span / s <= 6.0)
            .unwrap_or(mag * 10.0)
            .max(if self.scale == Scale::Log10 { 1.0 } else { 0.0 });
        let mut t = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.hi + 1e-9 * span {
            out.push(t);
            t += step;
        }
        out
    }

    fn tick_label(&self, t: f64) -> String {
        match self.scale {
            Scale::Linear => trim_num(t),
            Scale::Log10 => {
                let v = 10f64.powf(t);
                if (1e-3..1e4).contains(&v.abs()) {
                    trim_num(v)
                } else {
                    format!("1e{}", t.round() as i64)
                }
            }
        }
    }
}

fn trim_num(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.into()
    }
}

fn marker_svg(m: Marker, x: f64, y: f64, color: &str) -> String {
    let r = 3.2;
    match m {
        Marker::Circle => {
            format!(r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{color}"/>"#)
        }
        Marker::Square => format!(
            r#"<rect x="{:.2}" y="{:.2}" width="{:.1}" height="{:.1}" fill="{color}"/>"#,
            x - r,
            y - r,
            2.0 * r,
            2.0 * r
        ),
        Marker::Diamond => format!(
            r#"<path d="M {x:.2} {:.2} L {:.2} {y:.2} L {x:.2} {:.2} L {:.2} {y:.2} Z" fill="{color}"/>"#,
            y - 1.3 * r,
            x + 1.3 * r,
            y + 1.3 * r,
            x - 1.3 * r
        ),
        Marker::Triangle => format!(
            r#"<path d="M {x:.2} {:.2} L {:.2} {:.2} L {:.2} {:.2} Z" fill="{color}"/>"#,
            y - 1.2 * r,
            x + 1.2 * r,
            y + r,
            x - 1.2 * r,
            y + r
        ),
        Marker::Plus => format!(
            r#"<path d="M {x:.2} {:.2} V {:.2} M {:.2} {y:.2} H {:.2}" stroke="{color}" stroke-width="1.6"/>"#,
            y - r,
            y + r,
            x - r,
            x + r
        ),
        Marker::Cross => format!(
            r#"<path d="M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}" stroke="{color}" stroke-width="1.6"/>"#,
            x - r,
            y - r,
            x + r,
            y + r,
            x - r,
            y + r,
            x + r,
            y - r
        ),
    }
}

fn render_panel(out: &mut String, p: &Panel, x0: f64, y0: f64) {
    use std::fmt::Write as _;
    let xs = Axis::fit(
        p.x_scale,
        p.series.iter().flat_map(|s| s.points.iter().map(|q| q.0)),
    );
    let ys = Axis::fit(
        p.y_scale,
        p.series.iter().flat_map(|s| s.points.iter().map(|q| q.1)),
    );
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let px = |u: f64| x0 + MARGIN_L + u * plot_w;
    let py = |u: f64| y0 + PANEL_H - MARGIN_B - u * plot_h;

    let _ = write!(
        out,
        r##"<rect x="{:.2}" y="{:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#444"/>"##,
        x0 + MARGIN_L,
        y0 + MARGIN_T
    );
    let _ = write!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13" font-weight="bold">{}</text>"#,
        x0 + MARGIN_L + plot_w / 2.0,
        y0 + MARGIN_T - 12.0,
        p.title
    );
    let _ = write!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
        x0 + MARGIN_L + plot_w / 2.0,
        y0 + PANEL_H - 10.0,
        p.x_label
    );
    let _ = write!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        x0 + 14.0,
        y0 + MARGIN_T + plot_h / 2.0,
        x0 + 14.0,
        y0 + MARGIN_T + plot_h / 2.0,
        p.y_label
    );

    for t in xs.ticks() {
        let u = (t - xs.lo) / (xs.hi - xs.lo);
        let x = px(u);
        let _ = write!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/>"##,
            py(0.0),
            py(0.0) + 4.0
        );
        let _ = write!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            py(0.0) + 16.0,
            xs.tick_label(t)
        );
    }
    for t in ys.ticks() {
        let u = (t - ys.lo) / (ys.hi - ys.lo);
        let y = py(u);
        let _ = write!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#444"/>"##,
            px(0.0) - 4.0,
            px(0.0)
        );
        let _ = write!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#,
            px(0.0) - 7.0,
            y + 3.5,
            ys.tick_label(t)
        );
    }

    for s in &p.series {
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter_map(|&(x, y)| Some((px(xs.unit(x)?), py(ys.unit(y)?))))
            .collect();
        if s.line && pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = write!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.4"/>"#,
                path.join(" "),
                s.color
            );
        }
        for (x, y) in &pts {
            out.push_str(&marker_svg(s.marker, *x, *y, s.color));
        }
    }

    // legend, top-right corner of the plot area
    for (i, s) in p.series.iter().enumerate() {
        let lx = x0 + MARGIN_L + plot_w - 86.0;
        let ly = y0 + MARGIN_T + 12.0 + 14.0 * i as f64;
        out.push_str(&marker_svg(s.marker, lx, ly - 3.0, s.color));
        let _ = write!(
            out,
            r#"<text x="{:.2}" y="{ly:.2}" font-size="10">{}</text>"#,
            lx + 8.0,
            s.label
        );
    }
}

/// Writes the panels side by side as one SVG file.
pub fn write_svg(path: &Path, panels: &[Panel]) -> Result<()> {
    let total_w = PANEL_W * panels.len() as f64;
    let mut body = String::new();
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut body, p, PANEL_W * i as f64, 0.0);
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {total_w:.0} {PANEL_H:.0}" font-family="sans-serif">"#
    )?;
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(w, "{body}")?;
    writeln!(w, "</svg>")?;
    w.flush()?;
    Ok(())
}
