//! SVG figure of the essential spectrum on the real line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::report::SpectrumReport;
use crate::singular::{ExceptionalPoint, PointStatus};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 220.0;
const MARGIN: f64 = 50.0;
const AXIS_Y: f64 = 160.0;
const REGULAR_Y: f64 = 70.0;
const SINGULAR_Y: f64 = 110.0;
const BAND_H: f64 = 14.0;

/// Fixed-format coordinate.
fn c(x: f64) -> String {
    format!("{x:.2}")
}

/// Tick label: up to six decimals, trailing zeros trimmed.
fn label(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

struct Scale {
    lo: f64,
    hi: f64,
}

impl Scale {
    fn new(points: &[f64]) -> Self {
        let (mut lo, mut hi) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        if !lo.is_finite() {
            (lo, hi) = (-1.0, 1.0);
        }
        let pad = 0.15 * (hi - lo).max(1.0);
        Scale { lo: lo - pad, hi: hi + pad }
    }

    fn x(&self, v: f64) -> f64 {
        if v == f64::NEG_INFINITY {
            return MARGIN;
        }
        if v == f64::INFINITY {
            return WIDTH - MARGIN;
        }
        MARGIN + (v - self.lo) / (self.hi - self.lo) * (WIDTH - 2.0 * MARGIN)
    }
}

fn finite_points(sets: &[&IntervalSet], points: &[ExceptionalPoint]) -> Vec<f64> {
    let mut v: Vec<f64> = sets
        .iter()
        .flat_map(|s| s.intervals().iter().flat_map(|i| [i.lo, i.hi]))
        .filter(|x| x.is_finite())
        .collect();
    v.extend(points.iter().map(|p| p.lambda));
    v
}

fn band(out: &mut String, sc: &Scale, iv: &Interval, y: f64, kind: &str, fill: &str) {
    let x0 = sc.x(iv.lo);
    let x1 = sc.x(iv.hi);
    // degenerate intervals still get a visible sliver
    let (x0, w) = if x1 - x0 < 2.0 { (0.5 * (x0 + x1) - 1.0, 2.0) } else { (x0, x1 - x0) };
    let _ = writeln!(
        out,
        r#"<rect class="band {kind}" x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
        c(x0),
        c(y),
        c(w),
        c(BAND_H)
    );
    let mid = y + 0.5 * BAND_H;
    if iv.lo == f64::NEG_INFINITY {
        let _ = writeln!(
            out,
            r#"<polygon class="arrow {kind}" points="{},{} {},{} {},{}" fill="{fill}"/>"#,
            c(MARGIN - 12.0),
            c(mid),
            c(MARGIN),
            c(y - 4.0),
            c(MARGIN),
            c(y + BAND_H + 4.0)
        );
    }
    if iv.hi == f64::INFINITY {
        let e = WIDTH - MARGIN;
        let _ = writeln!(
            out,
            r#"<polygon class="arrow {kind}" points="{},{} {},{} {},{}" fill="{fill}"/>"#,
            c(e + 12.0),
            c(mid),
            c(e),
            c(y - 4.0),
            c(e),
            c(y + BAND_H + 4.0)
        );
    }
}

fn status_name(s: PointStatus) -> &'static str {
    match s {
        PointStatus::InRegular => "in-regular",
        PointStatus::InSingularClosure => "in-singular-closure",
        PointStatus::Undetermined => "undetermined",
    }
}

fn marker(out: &mut String, sc: &Scale, p: &ExceptionalPoint) {
    let x = sc.x(p.lambda);
    let name = status_name(p.status);
    let y = AXIS_Y;
    let glyph = match p.status {
        PointStatus::InRegular => format!(r#"<circle cx="{}" cy="{}" r="5" fill="black"/>"#, c(x), c(y)),
        PointStatus::InSingularClosure => {
            format!(r#"<circle cx="{}" cy="{}" r="5" fill="white" stroke="black"/>"#, c(x), c(y))
        }
        PointStatus::Undetermined => format!(
            r#"<path d="M{},{} L{},{} M{},{} L{},{}" stroke="black"/>"#,
            c(x - 5.0),
            c(y - 5.0),
            c(x + 5.0),
            c(y + 5.0),
            c(x - 5.0),
            c(y + 5.0),
            c(x + 5.0),
            c(y - 5.0)
        ),
    };
    let _ = writeln!(out, r#"<g class="marker {name}" data-lambda="{}">{glyph}"#, label(p.lambda));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">{name}</text></g>"#,
        c(x),
        c(y + 18.0)
    );
}

/// SVG 1.1 document; identical reports give identical bytes.
pub fn plot_svg(report: &SpectrumReport) -> String {
    let reg = &report.regular_part.set;
    let sing = &report.singular_part.set;
    let points = &report.lambda_beta.points;
    let sc = Scale::new(&finite_points(&[reg, sing], points));

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        WIDTH, HEIGHT, WIDTH, HEIGHT
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" font-size="13" text-anchor="middle">essential spectrum: {}</text>"#,
        c(WIDTH / 2.0),
        xml_escape(&report.model.name)
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        c(MARGIN - 15.0),
        c(AXIS_Y),
        c(WIDTH - MARGIN + 15.0),
        c(AXIS_Y)
    );

    let mut ticks: Vec<f64> = finite_points(&[reg, sing], &[]);
    ticks.sort_by(f64::total_cmp);
    ticks.dedup_by(|a, b| (sc.x(*a) - sc.x(*b)).abs() < 20.0);
    for t in ticks {
        let x = sc.x(t);
        let _ = writeln!(
            out,
            r#"<line class="tick" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" font-size="10" text-anchor="middle">{}</text>"#,
            c(x),
            c(AXIS_Y - 4.0),
            c(x),
            c(AXIS_Y + 4.0),
            c(x),
            c(AXIS_Y + 32.0),
            label(t)
        );
    }

    // regular components lying inside the singular part add nothing to the picture
    let covered = |i: &Interval| {
        let tol = 1e-9 * (1.0 + i.lo.abs().max(i.hi.abs()).min(1e300));
        sing.intervals().iter().any(|s| s.lo <= i.lo + tol && i.hi <= s.hi + tol)
    };
    let shown: Vec<&Interval> = reg.intervals().iter().filter(|i| !covered(i)).collect();
    if !shown.is_empty() {
        let _ = writeln!(out, r#"<text x="5" y="{}" font-size="10">regular</text>"#, c(REGULAR_Y + 11.0));
    }
    for iv in shown {
        band(&mut out, &sc, iv, REGULAR_Y, "regular", "#4a7ab5");
    }
    if !sing.is_empty() {
        let _ = writeln!(out, r#"<text x="5" y="{}" font-size="10">singular</text>"#, c(SINGULAR_Y + 11.0));
    }
    for iv in sing.intervals() {
        band(&mut out, &sc, iv, SINGULAR_Y, "singular", "#d9822b");
    }
    for p in points {
        marker(&mut out, &sc, p);
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn write_plot(report: &SpectrumReport, path: &Path) -> Result<()> {
    std::fs::write(path, plot_svg(report)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
