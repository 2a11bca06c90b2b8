//! Static SVG plots with a fixed canvas; output depends only on the data.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::artifact::RunArtifact;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

/// Range of the phase-field color scale.
pub const COLOR_RANGE: (f64, f64) = (-1.2, 1.2);

const SOFT_COLOR: [f64; 3] = [59.0, 76.0, 192.0];
const MID_COLOR: [f64; 3] = [221.0, 221.0, 221.0];
const HARD_COLOR: [f64; 3] = [180.0, 4.0, 38.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlotKind {
    /// The deformed beam, colored by the phase field.
    Curve,
    /// `K` against `t`.
    Phase,
    /// `v` against `t`, colored by value.
    Design,
}

impl PlotKind {
    pub const ALL: [PlotKind; 3] = [PlotKind::Curve, PlotKind::Phase, PlotKind::Design];

    pub fn file_name(self) -> &'static str {
        match self {
            PlotKind::Curve => "curve.svg",
            PlotKind::Phase => "phase.svg",
            PlotKind::Design => "design.svg",
        }
    }
}

/// Diverging map: soft blue at -1.2, grey at 0, hard red at 1.2.
pub fn phase_color(v: f64) -> String {
    let (lo, hi) = COLOR_RANGE;
    let s = ((v.clamp(lo, hi) - lo) / (hi - lo)) * 2.0;
    let (from, to, w) = if s <= 1.0 {
        (SOFT_COLOR, MID_COLOR, s)
    } else {
        (MID_COLOR, HARD_COLOR, s - 1.0)
    };
    let c: Vec<u8> = (0..3)
        .map(|i| (from[i] + w * (to[i] - from[i])).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Affine map of a data box onto the canvas, y pointing up.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: (f64, f64), ys: (f64, f64), equal_aspect: bool) -> Self {
        let pad = |(lo, hi): (f64, f64)| {
            let span = (hi - lo).max(1e-9);
            (lo - 0.05 * span, hi + 0.05 * span)
        };
        let (mut x, mut y) = (pad(xs), pad(ys));
        if equal_aspect {
            let sx = (x.1 - x.0) / (WIDTH - 2.0 * MARGIN);
            let sy = (y.1 - y.0) / (HEIGHT - 2.0 * MARGIN);
            let s = sx.max(sy);
            let grow = |(lo, hi): (f64, f64), px: f64| {
                let mid = 0.5 * (lo + hi);
                (mid - 0.5 * s * px, mid + 0.5 * s * px)
            };
            x = grow(x, WIDTH - 2.0 * MARGIN);
            y = grow(y, HEIGHT - 2.0 * MARGIN);
        }
        Self { x, y }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn header(svg: &mut String, title: &str, frame: &Frame, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#,
        WIDTH / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for i in 0..=4 {
        let s = f64::from(i) / 4.0;
        let xv = frame.x.0 + s * (frame.x.1 - frame.x.0);
        let yv = frame.y.0 + s * (frame.y.1 - frame.y.0);
        let (x, y) = (frame.px(xv), frame.py(yv));
        let bottom = HEIGHT - MARGIN;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{}" stroke="black"/>"#,
            bottom + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{xv:.2}</text>"#,
            bottom + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y:.2}" x2="{MARGIN}" y2="{y:.2}" stroke="black"/>"#,
            MARGIN - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{yv:.2}</text>"#,
            MARGIN - 8.0,
            y + 4.0
        );
    }
}

fn segment(svg: &mut String, frame: &Frame, a: [f64; 2], b: [f64; 2], color: &str) {
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="3" stroke-linecap="round"/>"#,
        frame.px(a[0]),
        frame.py(a[1]),
        frame.px(b[0]),
        frame.py(b[1])
    );
}

fn polyline(svg: &mut String, frame: &Frame, xs: &[f64], ys: &[f64], color: &str) {
    let pts: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
        pts.join(" ")
    );
}

/// Curve points colored segment by segment with the mean of `v` at its ends.
pub fn curve_svg(points: &[[f64; 2]], v: &[f64]) -> Result<String> {
    if points.len() != v.len() || points.len() < 2 {
        return Err(Error::Degenerate(
            "curve plot needs matching points and phase field".into(),
        ));
    }
    let frame = Frame::new(
        bounds(points.iter().map(|p| p[0])),
        bounds(points.iter().map(|p| p[1])),
        true,
    );
    let mut svg = String::new();
    header(&mut svg, "deformed beam", &frame, "x", "y");
    for (w, vv) in points.windows(2).zip(v.windows(2)) {
        segment(&mut svg, &frame, w[0], w[1], &phase_color(0.5 * (vv[0] + vv[1])));
    }
    let _ = writeln!(
        svg,
        r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#,
        frame.px(points[0][0]),
        frame.py(points[0][1])
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Graph of `values` over `t`; `colored` uses the phase-field map per segment.
pub fn graph_svg(t: &[f64], values: &[f64], title: &str, ylabel: &str, colored: bool) -> Result<String> {
    if t.len() != values.len() || t.len() < 2 {
        return Err(Error::Degenerate(format!(
            "{title}: need at least two matching samples"
        )));
    }
    let yb = if colored {
        COLOR_RANGE
    } else {
        bounds(values.iter().copied())
    };
    let frame = Frame::new((0.0, 1.0), yb, false);
    let mut svg = String::new();
    header(&mut svg, title, &frame, "t", ylabel);
    if frame.y.0 < 0.0 && frame.y.1 > 0.0 {
        let y = frame.py(0.0);
        let _ = writeln!(
            svg,
            r#"<line x1="{MARGIN}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="grey" stroke-dasharray="4 4"/>"#,
            WIDTH - MARGIN
        );
    }
    if colored {
        for (tw, vw) in t.windows(2).zip(values.windows(2)) {
            let color = phase_color(0.5 * (vw[0] + vw[1]));
            segment(&mut svg, &frame, [tw[0], vw[0]], [tw[1], vw[1]], &color);
        }
    } else {
        polyline(&mut svg, &frame, t, values, "black");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders one plot of a record; missing inputs are named in the error.
pub fn export_plot(record: &RunArtifact, kind: PlotKind) -> Result<String> {
    let table = record
        .table
        .as_ref()
        .ok_or_else(|| Error::Degenerate("record has no nodal table".into()))?;
    match kind {
        PlotKind::Curve => {
            let curve = record
                .curve
                .as_ref()
                .ok_or_else(|| Error::Degenerate("record has no curve".into()))?;
            curve_svg(curve, &table.v)
        }
        PlotKind::Phase => graph_svg(&table.t, &table.phase, "phase", "K", false),
        PlotKind::Design => graph_svg(&table.t, &table.v, "phase field", "v", true),
    }
}
