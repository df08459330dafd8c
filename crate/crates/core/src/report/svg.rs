//! Minimal standalone SVG line plots.

use std::fmt::Write;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_log: bool,
    pub series: Vec<Series>,
}

struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.round() {
        format!("{}", v.round())
    } else {
        format!("{v:.2}")
    }
}

impl LinePlot {
    fn x_map(&self, x: f64) -> Option<f64> {
        if self.x_log {
            (x > 0.0).then(|| x.log10())
        } else {
            Some(x)
        }
    }

    fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let pts = self
            .series
            .iter()
            .flat_map(|s| &s.points)
            .filter_map(|&(x, y)| Some((self.x_map(x)?, y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite());
        let mut b: Option<(f64, f64, f64, f64)> = None;
        for (x, y) in pts {
            b = Some(match b {
                None => (x, x, y, y),
                Some((x0, x1, y0, y1)) => (x0.min(x), x1.max(x), y0.min(y), y1.max(y)),
            });
        }
        b.map(|(x0, x1, y0, y1)| {
            let pad = ((y1 - y0) * 0.05).max(1e-9);
            (x0, x1.max(x0 + 1e-9), y0 - pad, y1 + pad)
        })
    }

    fn render_into(&self, out: &mut String, f: &Frame) {
        let Some((x0, x1, y0, y1)) = self.bounds() else {
            return;
        };
        let sx = |x: f64| f.left + (x - x0) / (x1 - x0) * f.width;
        let sy = |y: f64| f.top + f.height - (y - y0) / (y1 - y0) * f.height;

        let _ = writeln!(
            out,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#333"/>"##,
            f.left, f.top, f.width, f.height
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
            f.left + f.width / 2.0,
            f.top - 10.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#,
            f.left + f.width / 2.0,
            f.top + f.height + 36.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
            f.left - 48.0,
            f.top + f.height / 2.0,
            f.left - 48.0,
            f.top + f.height / 2.0,
            escape(&self.y_label)
        );

        let x_ticks: Vec<(f64, String)> = if self.x_log {
            (x0.ceil() as i32..=x1.floor() as i32)
                .map(|d| (d as f64, fmt_tick(10f64.powi(d))))
                .collect()
        } else {
            nice_ticks(x0, x1, 8).into_iter().map(|t| (t, fmt_tick(t))).collect()
        };
        for (t, label) in x_ticks {
            let x = sx(t);
            let _ = writeln!(
                out,
                r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#ddd"/><text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="10">{label}</text>"##,
                f.top,
                f.top + f.height,
                f.top + f.height + 14.0
            );
        }
        for t in nice_ticks(y0, y1, 6) {
            let y = sy(t);
            let _ = writeln!(
                out,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"##,
                f.left,
                f.left + f.width,
                f.left - 4.0,
                y + 3.0,
                fmt_tick(t)
            );
        }

        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mut d = String::new();
            for &(x, y) in &s.points {
                let Some(mx) = self.x_map(x) else { continue };
                if !y.is_finite() {
                    continue;
                }
                let y = y.clamp(y0, y1);
                let _ = write!(d, "{}{:.2},{:.2}", if d.is_empty() { "M" } else { " L" }, sx(mx), sy(y));
            }
            let _ = writeln!(
                out,
                r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.2"/>"#
            );
            let ly = f.top + 16.0 + 16.0 * i as f64;
            let lx = f.left + f.width - 190.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Stacks `panels` vertically into one SVG document.
pub fn render(panels: &[LinePlot], width: f64, panel_height: f64) -> String {
    let total = panels.len() as f64 * panel_height;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{total}" viewBox="0 0 {width} {total}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        let frame = Frame {
            left: 70.0,
            top: i as f64 * panel_height + 36.0,
            width: width - 100.0,
            height: panel_height - 90.0,
        };
        p.render_into(&mut out, &frame);
    }
    out.push_str("</svg>\n");
    out
}
