//! SVG output for computed shapes and sweeps.

use std::fmt::Write;

use super::{RowStatus, SweepResult};
use crate::real::Real;
use crate::shapes::StarShape;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;

fn open(w: f64, h: f64) -> String {
    format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n")
}

fn path(pts: &[(f64, f64)], closed: bool) -> String {
    let mut d = String::new();
    for (i, (x, y)) in pts.iter().enumerate() {
        let _ = write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" });
    }
    if closed {
        d.push('Z');
    }
    d
}

/// Boundaries of the shapes, scaled to a common frame.
pub fn shapes_svg<T: Real>(shapes: &[StarShape<T>]) -> String {
    let polys: Vec<Vec<[f64; 2]>> = shapes
        .iter()
        .map(|s| {
            s.polyline(256)
                .into_iter()
                .map(|p| [p[0].to_f64_lossy(), p[1].to_f64_lossy()])
                .collect()
        })
        .collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in polys.iter().flatten() {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    if polys.iter().all(Vec::is_empty) {
        return open(WIDTH, HEIGHT) + "</svg>\n";
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let scale = (WIDTH.min(HEIGHT) - 2.0 * MARGIN) / span;
    let mut out = open(WIDTH, HEIGHT);
    for poly in &polys {
        let pts: Vec<(f64, f64)> = poly
            .iter()
            .map(|p| {
                (
                    MARGIN + (p[0] - lo[0]) * scale,
                    HEIGHT - MARGIN - (p[1] - lo[1]) * scale,
                )
            })
            .collect();
        let _ = writeln!(
            out,
            r##"<path d="{}" fill="#c8d8f0" stroke="#203060" stroke-width="1.5"/>"##,
            path(&pts, true)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Single and multi-component energies against ε, with the estimated
/// fission threshold as a vertical line.
pub fn sweep_svg(result: &SweepResult) -> String {
    let rows: Vec<_> = result
        .rows
        .iter()
        .filter(|r| r.status == RowStatus::Ok)
        .collect();
    let mut out = open(WIDTH, HEIGHT);
    if rows.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let mut ys: Vec<f64> = rows.iter().map(|r| r.best_single_energy).collect();
    ys.extend(rows.iter().filter_map(|r| r.best_multi_energy));
    let (x0, x1) = (xs[0], xs[xs.len() - 1].max(xs[0] + 1e-12));
    let y0 = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let y1 = ys
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(y0 + 1e-12);
    let map = |x: f64, y: f64| {
        (
            MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN),
            HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN),
        )
    };
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let single: Vec<_> = rows
        .iter()
        .map(|r| map(r.epsilon, r.best_single_energy))
        .collect();
    let multi: Vec<_> = rows
        .iter()
        .filter_map(|r| r.best_multi_energy.map(|m| map(r.epsilon, m)))
        .collect();
    for (pts, colour) in [(&single, "#203060"), (&multi, "#b03020")] {
        if pts.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            path(pts, false)
        );
        for (x, y) in pts.iter() {
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="{colour}"/>"#
            );
        }
    }
    if let Some(t) = result.fission_threshold {
        let (x, _) = map(t, y0);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.3}" y1="{MARGIN}" x2="{x:.3}" y2="{}" stroke="gray" stroke-dasharray="5 4"/>"#,
            HEIGHT - MARGIN
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">epsilon [{x0:.4}, {x1:.4}], energy [{y0:.4}, {y1:.4}]</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    out.push_str("</svg>\n");
    out
}
