//! Self-contained SVG line charts of monthly series.
//!
//! Element classes: `series` polylines (split at MISSING slots), `point`
//! for isolated observations, `break` solid red vertical lines,
//! `annotation` dotted vertical lines and `shade` rectangles.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vadscope_core::{MonthlySeries, YearMonth};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnnotationStyle {
    #[serde(rename = "presidency-dotted")]
    PresidencyDotted,
    #[serde(rename = "break-solid")]
    BreakSolid,
    #[serde(rename = "recession-shaded")]
    RecessionShaded,
}

/// A labeled date or interval drawn on top of a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    pub date: YearMonth,
    /// Last month of a shaded interval (inclusive).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<YearMonth>,
    #[serde(default)]
    pub label: String,
    pub style: AnnotationStyle,
}

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 40.0;

struct Frame {
    start: YearMonth,
    len: usize,
    lo: f64,
    hi: f64,
}

impl Frame {
    fn x(&self, offset: f64) -> f64 {
        let span = (self.len.max(2) - 1) as f64;
        LEFT + (WIDTH - LEFT - RIGHT) * offset / span
    }

    fn x_month(&self, m: YearMonth) -> Option<f64> {
        let off = self.start.months_until(m);
        (off >= 0 && (off as usize) < self.len).then(|| self.x(off as f64))
    }

    fn y(&self, v: f64) -> f64 {
        TOP + (HEIGHT - TOP - BOTTOM) * (self.hi - v) / (self.hi - self.lo)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the chart. `breaks` are drawn as solid red lines, as are
/// annotations with the `break-solid` style.
pub fn render_svg(series: &MonthlySeries<f64>, breaks: &[YearMonth], annotations: &[Annotation]) -> String {
    let present = series.present();
    let (mut lo, mut hi) = present
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, v)| {
            (a.min(v), b.max(v))
        });
    if present.is_empty() {
        (lo, hi) = (0.0, 1.0);
    } else if hi - lo < 1e-12 {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    } else {
        let pad = 0.05 * (hi - lo);
        (lo, hi) = (lo - pad, hi + pad);
    }
    let f = Frame {
        start: series.start(),
        len: series.len(),
        lo,
        hi,
    };
    let (y0, y1) = (TOP, HEIGHT - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(series.label()));
    let _ = writeln!(
        s,
        r#"<rect class="background" x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text class="label" x="{LEFT}" y="20" font-size="13">{}</text>"#,
        escape(series.label())
    );

    for a in annotations
        .iter()
        .filter(|a| a.style == AnnotationStyle::RecessionShaded)
    {
        let end = a.end.unwrap_or(a.date);
        // Clamp the interval to the plotted window.
        let first = a.date.max(f.start);
        let last = end.min(f.start.plus(f.len as i64 - 1));
        if first > last {
            continue;
        }
        let (xa, xb) = (f.x_month(first).unwrap(), f.x_month(last).unwrap());
        let _ = writeln!(
            s,
            r##"<rect class="shade" x="{xa:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#999999" fill-opacity="0.25"><title>{}</title></rect>"##,
            (xb - xa).max(1.0),
            y1 - y0,
            escape(&a.label)
        );
    }

    let _ = writeln!(
        s,
        r#"<rect class="frame" x="{LEFT}" y="{y0}" width="{}" height="{}" fill="none" stroke="black" stroke-width="0.8"/>"#,
        WIDTH - LEFT - RIGHT,
        y1 - y0
    );
    for v in [f.lo, (f.lo + f.hi) / 2.0, f.hi] {
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            LEFT - 6.0,
            f.y(v) + 4.0
        );
    }
    let step = if f.len > 60 {
        24
    } else if f.len > 24 {
        12
    } else {
        3
    };
    for i in 0..f.len {
        let m = f.start.plus(i as i64);
        let due = if step >= 12 {
            m.month() == 1 && (m.year() % (step as i32 / 12) == 0)
        } else {
            i % step == 0
        };
        if due {
            let _ = writeln!(
                s,
                r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="middle">{m}</text>"#,
                f.x(i as f64),
                y1 + 16.0
            );
        }
    }

    // Consecutive present slots form one polyline; gaps break the line.
    let mut runs: Vec<Vec<(usize, f64)>> = Vec::new();
    for &(i, v) in &present {
        match runs.last_mut() {
            Some(run) if run.last().is_some_and(|&(j, _)| j + 1 == i) => run.push((i, v)),
            _ => runs.push(vec![(i, v)]),
        }
    }
    for run in &runs {
        if let [(i, v)] = run[..] {
            let _ = writeln!(
                s,
                r##"<circle class="point" cx="{:.2}" cy="{:.2}" r="2" fill="#1f4e9c"/>"##,
                f.x(i as f64),
                f.y(v)
            );
            continue;
        }
        let pts: Vec<String> = run
            .iter()
            .map(|&(i, v)| format!("{:.2},{:.2}", f.x(i as f64), f.y(v)))
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline class="series" points="{}" fill="none" stroke="#1f4e9c" stroke-width="1.4"/>"##,
            pts.join(" ")
        );
    }

    for a in annotations
        .iter()
        .filter(|a| a.style == AnnotationStyle::PresidencyDotted)
    {
        if let Some(x) = f.x_month(a.date) {
            let _ = writeln!(
                s,
                r##"<line class="annotation" x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="#333333" stroke-width="1" stroke-dasharray="2,3"/>"##
            );
            let _ = writeln!(
                s,
                r#"<text class="label" x="{:.2}" y="{:.2}">{}</text>"#,
                x + 3.0,
                y0 + 12.0,
                escape(&a.label)
            );
        }
    }

    let solid = breaks.iter().copied().chain(
        annotations
            .iter()
            .filter(|a| a.style == AnnotationStyle::BreakSolid)
            .map(|a| a.date),
    );
    for m in solid {
        if let Some(x) = f.x_month(m) {
            let _ = writeln!(
                s,
                r#"<line class="break" x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="red" stroke-width="1.6"><title>{m}</title></line>"#
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Writes the chart of `series` to `path`.
pub fn emit_plot(
    series: &MonthlySeries<f64>,
    breaks: &[YearMonth],
    annotations: &[Annotation],
    path: &Path,
) -> Result<(), CliError> {
    fs::write(path, render_svg(series, breaks, annotations)).map_err(|e| CliError::io(path, e))
}
