//! SVG rendering of an audit report.
//!
//! The output depends only on the report, so identical reports give
//! byte-identical files.

use std::fmt::Write;

use crate::report::AuditReport;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 110.0;
pub const TICK_COUNT: usize = 5;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Short fixed-width number for labels.
fn label_number(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Grid indices that receive a tick label.
pub fn tick_indices(k: usize) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> =
        (0..TICK_COUNT).map(|i| ((i * (k - 1)) as f64 / (TICK_COUNT - 1) as f64).round() as usize).collect();
    idx.dedup();
    idx
}

struct Frame {
    t_lo: f64,
    t_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        LEFT + (t - self.t_lo) / (self.t_hi - self.t_lo) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - TOP - BOTTOM)
    }
}

fn polyline(frame: &Frame, ts: &[f64], vs: &[f64]) -> String {
    let mut pts = String::new();
    for (i, (&t, &v)) in ts.iter().zip(vs).enumerate() {
        if i > 0 {
            pts.push(' ');
        }
        let _ = write!(pts, "{:.2},{:.2}", frame.x(t), frame.y(v));
    }
    pts
}

/// Renders the plot: the curve solid, the reference dotted, the target as a red point.
pub fn render(report: &AuditReport) -> String {
    let finite = report.fs.iter().chain(&report.fit_values).chain(std::iter::once(&report.prediction));
    let (mut y_lo, mut y_hi) = finite
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !y_lo.is_finite() {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    let pad = if y_hi > y_lo { 0.05 * (y_hi - y_lo) } else { 0.5f64.max(y_lo.abs() * 0.05) };
    y_lo -= pad;
    y_hi += pad;
    let frame = Frame { t_lo: report.interval.a, t_hi: report.interval.b, y_lo, y_hi };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="13">{} = {}</text>"#,
        WIDTH / 2.0,
        escape(&report.utility_spec),
        escape(&format!("{:.6}", report.utility))
    );
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        s,
        r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    for q in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * q as f64 / 4.0;
        let y = frame.y(v);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 4.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            label_number(v)
        );
    }
    for idx in tick_indices(report.ts.len()) {
        let x = frame.x(report.ts[idx]);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y1 + 4.0);
        let labels = report.tick_labels.get(idx).map(Vec::as_slice).unwrap_or(&[]);
        for (line, (name, value)) in labels.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}={}</text>"#,
                y1 + 18.0 + 13.0 * line as f64,
                escape(name),
                label_number(*value)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
        polyline(&frame, &report.ts, &report.fs)
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2" stroke-dasharray="2,4"/>"#,
        polyline(&frame, &report.ts, &report.fit_values)
    );
    if report.interval.contains(0.0) {
        let (cx, cy) = (frame.x(0.0), frame.y(report.prediction));
        let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="5" fill="red"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="red">{}</text>"#,
            cx + 8.0,
            cy - 8.0,
            label_number(report.prediction)
        );
    }
    s.push_str("</svg>\n");
    s
}
