//! Plain SVG sketches of lens and minimal-curve configurations.

use std::fmt::Write;

use super::curves::MinCurveResult;
use super::LensState;
use crate::real::Real;

const SIZE: f64 = 480.0;

struct Canvas {
    scale: f64,
    cx: f64,
    cy: f64,
    body: String,
}

impl Canvas {
    fn new(half_width: f64, center_x: f64) -> Self {
        Self {
            scale: SIZE / (2.0 * half_width),
            cx: center_x,
            cy: 0.0,
            body: String::new(),
        }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (
            SIZE / 2.0 + (p[0] - self.cx) * self.scale,
            SIZE / 2.0 - (p[1] - self.cy) * self.scale,
        )
    }

    fn polyline(&mut self, pts: &[[f64; 2]], stroke: &str, fill: &str) {
        let mut d = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (x, y) = self.map(p);
            let _ = write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" });
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" fill="{fill}" stroke="{stroke}" stroke-width="1.5"/>"#
        );
    }

    fn unit_circle(&mut self) {
        let (x, y) = self.map([0.0, 0.0]);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="none" stroke="black" stroke-dasharray="4 3"/>"#,
            self.scale
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n{}</svg>\n",
            self.body
        )
    }
}

/// The unit disk with the lens shaded between the two arcs.
pub fn lens_svg<T: Real>(st: &LensState<T>) -> String {
    let tb = st.contact_angle.to_f64_lossy();
    let th = st.half_opening.to_f64_lossy();
    let rho = st.radius.to_f64_lossy();
    let eta = st.center_abscissa.to_f64_lossy();
    let mut cv = Canvas::new(1.4, 0.2);
    cv.unit_circle();
    let n = 200;
    let mut pts: Vec<[f64; 2]> = (0..=n)
        .map(|i| {
            let a = -th + 2.0 * th * i as f64 / n as f64;
            [eta + rho * a.cos(), rho * a.sin()]
        })
        .collect();
    pts.extend((0..=n).map(|i| {
        let a = tb - 2.0 * tb * i as f64 / n as f64;
        [a.cos(), a.sin()]
    }));
    cv.polyline(&pts, "blue", "rgba(255,0,0,0.25)");
    cv.finish()
}

/// The unit disk and the free part of a minimal curve.
pub fn min_curve_svg<T: Real>(r: &MinCurveResult<T>) -> String {
    let t = r.t.to_f64_lossy();
    let mut cv = Canvas::new(1.2 + t, 0.0);
    cv.unit_circle();
    let pts: Vec<[f64; 2]> = r
        .free_boundary(200)
        .into_iter()
        .map(|p| [p[0].to_f64_lossy(), p[1].to_f64_lossy()])
        .collect();
    cv.polyline(&pts, "blue", "none");
    cv.finish()
}
