//! CSV and SVG writers for curves and category effects.

use std::fmt::Write as _;
use std::io::Write;

use crate::catpd::CatEffect;
use crate::error::{Error, Result};
use crate::numpd::PDCurve;

pub(crate) fn flush_csv<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::Io {
            path: "<output>".into(),
            source: e.into_error(),
        })?
        .flush()
        .map_err(|e| Error::Io {
            path: "<output>".into(),
            source: e,
        })
}

/// `x,pd_y,count`, one row per kept point.
pub fn write_curve_csv<W: Write>(curve: &PDCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "pd_y", "count"])?;
    for i in 0..curve.len() {
        w.write_record([
            curve.x[i].to_string(),
            curve.pd_y[i].to_string(),
            curve.counts[i].to_string(),
        ])?;
    }
    flush_csv(w)
}

/// `category_label,delta,count`, one row per category in code order.
/// Unsupported categories carry `NaN` and a zero count.
pub fn write_effect_csv<W: Write>(effect: &CatEffect, labels: &[String], out: W) -> Result<()> {
    if labels.len() != effect.delta.len() {
        return Err(Error::LengthMismatch {
            what: "category labels",
            got: labels.len(),
            expected: effect.delta.len(),
        });
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["category_label", "delta", "count"])?;
    for (k, label) in labels.iter().enumerate() {
        w.write_record([
            label.clone(),
            effect.delta[k].to_string(),
            effect.counts[k].to_string(),
        ])?;
    }
    flush_csv(w)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        let pad = |lo: f64, hi: f64| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let (x_lo, x_hi) = pad(x_lo, x_hi);
        let (y_lo, y_hi) = pad(y_lo, y_hi);
        Frame {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open_svg(out: &mut String, title: &str, x_label: &str, y_label: &str, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (left, bottom) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{left} {MARGIN} V{bottom} H{}" fill="none" stroke="black"/>"#,
        WIDTH - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for y in [frame.y_lo, frame.y_hi] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 5.0,
            frame.py(y) + 4.0,
            tick(y)
        );
    }
}

fn tick(v: f64) -> String {
    format!("{:.4}", v)
        .trim_end_matches('0')
        .trim_end_matches('.')
        .to_string()
}

/// Static line chart of a curve with its kept points marked.
pub fn curve_svg(curve: &PDCurve, x_label: &str, y_label: &str) -> String {
    let fold = |v: &[f64]| {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| {
                (lo.min(a), hi.max(a))
            })
    };
    let (x_lo, x_hi) = fold(&curve.x);
    let (y_lo, y_hi) = fold(&curve.pd_y);
    let frame = Frame::new(x_lo, x_hi, y_lo, y_hi);

    let mut out = String::new();
    open_svg(
        &mut out,
        &format!("Partial dependence of {y_label} on {x_label}"),
        x_label,
        y_label,
        &frame,
    );
    for x in [frame.x_lo, frame.x_hi] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            frame.px(x),
            HEIGHT - MARGIN + 16.0,
            tick(x)
        );
    }
    let points: Vec<String> = curve
        .x
        .iter()
        .zip(&curve.pd_y)
        .map(|(&x, &y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        points.join(" ")
    );
    for (&x, &y) in curve.x.iter().zip(&curve.pd_y) {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="black"/>"#,
            frame.px(x),
            frame.py(y)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Static bar chart of category effects; unsupported categories get no bar.
pub fn effect_svg(effect: &CatEffect, labels: &[String], x_label: &str, y_label: &str) -> String {
    let finite: Vec<f64> = effect
        .delta
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    let y_lo = finite.iter().copied().fold(0.0f64, f64::min);
    let y_hi = finite.iter().copied().fold(0.0f64, f64::max);
    let k = labels.len().max(1) as f64;
    let frame = Frame::new(0.0, k, y_lo, y_hi);

    let mut out = String::new();
    open_svg(
        &mut out,
        &format!("Effect of {x_label} on {y_label}"),
        x_label,
        y_label,
        &frame,
    );
    let zero = frame.py(0.0);
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN}" y1="{zero:.2}" x2="{}" y2="{zero:.2}" stroke="gray"/>"#,
        WIDTH - MARGIN
    );
    let slot = (WIDTH - 2.0 * MARGIN) / k;
    for (i, label) in labels.iter().enumerate() {
        let left = frame.px(i as f64) + slot * 0.15;
        let d = effect.delta[i];
        if d.is_finite() {
            let top = frame.py(d.max(0.0));
            let height = (frame.py(d.min(0.0)) - top).abs();
            let _ = writeln!(
                out,
                r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{height:.2}" fill="steelblue"/>"#,
                slot * 0.7
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            frame.px(i as f64 + 0.5),
            HEIGHT - MARGIN + 16.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}
