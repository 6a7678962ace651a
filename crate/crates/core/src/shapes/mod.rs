//! Planar sets: Fourier star shapes and rasters.

mod asymmetry;
mod raster;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::periodic_trapezoid;
use crate::real::{c, Real};

pub use asymmetry::{
    disk_symmetric_difference, fraenkel_center, symmetric_difference, AsymmetryReport,
};
pub use raster::{fixtures, RasterSet};

/// Default number of nodes for perimeter quadrature.
pub const PERIMETER_NODES: usize = 4096;
/// Default raster pitch.
pub const DEFAULT_PITCH: f64 = 1.0 / 128.0;
/// Number of angles on which positivity of the radius is checked.
const POSITIVITY_NODES: usize = 4096;

/// Star-shaped region `{center + ρ(cos θ, sin θ) : ρ < r(θ)}` with
/// `r(θ) = r0 (1 + Σ a_k cos kθ + b_k sin kθ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "StarShapeRepr<T>",
    into = "StarShapeRepr<T>",
    bound = "T: Real"
)]
pub struct StarShape<T: Real> {
    center: [T; 2],
    r0: T,
    modes: Vec<(u32, T, T)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
struct StarShapeRepr<T: Real> {
    #[serde(default)]
    version: Option<u32>,
    center: [T; 2],
    r0: T,
    #[serde(default)]
    modes: Vec<(u32, T, T)>,
}

impl<T: Real> TryFrom<StarShapeRepr<T>> for StarShape<T> {
    type Error = Error;

    fn try_from(r: StarShapeRepr<T>) -> Result<Self> {
        if let Some(v) = r.version {
            if v != 1 {
                return Err(Error::Parse(format!(
                    "unsupported shape format version {v}"
                )));
            }
        }
        StarShape::new(r.center, r.r0, r.modes)
    }
}

impl<T: Real> From<StarShape<T>> for StarShapeRepr<T> {
    fn from(s: StarShape<T>) -> Self {
        Self {
            version: Some(1),
            center: s.center,
            r0: s.r0,
            modes: s.modes,
        }
    }
}

impl<T: Real> StarShape<T> {
    /// Validates `r0 > 0`, `k >= 1` and `r(θ) > 0`; sorts and merges modes.
    pub fn new(center: [T; 2], r0: T, modes: Vec<(u32, T, T)>) -> Result<Self> {
        if !(r0 > T::zero()) || !r0.is_finite() {
            return Err(Error::Argument(format!(
                "base radius must be positive, got {r0}"
            )));
        }
        if !center[0].is_finite() || !center[1].is_finite() {
            return Err(Error::Argument("center must be finite".into()));
        }
        let mut merged: Vec<(u32, T, T)> = Vec::with_capacity(modes.len());
        let mut sorted = modes;
        sorted.sort_by_key(|m| m.0);
        for (k, a, b) in sorted {
            if k == 0 {
                return Err(Error::Argument("mode index must be >= 1".into()));
            }
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Argument(format!(
                    "mode {k} has a non-finite coefficient"
                )));
            }
            match merged.last_mut() {
                Some(last) if last.0 == k => {
                    last.1 += a;
                    last.2 += b;
                }
                _ => merged.push((k, a, b)),
            }
        }
        let shape = Self {
            center,
            r0,
            modes: merged,
        };
        let min = shape.min_relative_radius(POSITIVITY_NODES);
        if !(min > T::zero()) {
            return Err(Error::Argument(format!(
                "radius function is not positive (min relative radius {min})"
            )));
        }
        Ok(shape)
    }

    pub fn disk(center: [T; 2], radius: T) -> Result<Self> {
        Self::new(center, radius, Vec::new())
    }

    pub fn unit_disk() -> Self {
        Self::disk([T::zero(); 2], T::one()).expect("unit disk")
    }

    /// Fourier fit of a positive radius function sampled on `n_samples`
    /// angles, keeping modes `1..=n_modes`.
    pub fn from_radius_fn<F: Fn(T) -> T>(
        center: [T; 2],
        radius: F,
        n_modes: u32,
        n_samples: usize,
    ) -> Result<Self> {
        let n = n_samples.max(2 * n_modes as usize + 2);
        let two_pi = T::TAU();
        let h = two_pi / T::from_usize_lossy(n);
        let samples: Vec<T> = (0..n).map(|i| radius(h * T::from_usize_lossy(i))).collect();
        let mean = samples.iter().copied().sum::<T>() / T::from_usize_lossy(n);
        let mut modes = Vec::new();
        for k in 1..=n_modes {
            let kf = T::from_u32(k).expect("mode index");
            let (mut a, mut b) = (T::zero(), T::zero());
            for (i, &r) in samples.iter().enumerate() {
                let th = kf * h * T::from_usize_lossy(i);
                a += r * th.cos();
                b += r * th.sin();
            }
            let scale = T::two() / (T::from_usize_lossy(n) * mean);
            modes.push((k, a * scale, b * scale));
        }
        Self::new(center, mean, modes)
    }

    /// Ellipse with the given semi-axes, centred and aligned with the axes.
    pub fn ellipse(center: [T; 2], semi_x: T, semi_y: T, n_modes: u32) -> Result<Self> {
        Self::from_radius_fn(
            center,
            |t| {
                let (s, co) = t.sin_cos();
                semi_x * semi_y / ((semi_y * co).powi(2) + (semi_x * s).powi(2)).sqrt()
            },
            n_modes,
            8 * n_modes as usize + 64,
        )
    }

    pub fn center(&self) -> [T; 2] {
        self.center
    }

    pub fn r0(&self) -> T {
        self.r0
    }

    pub fn modes(&self) -> &[(u32, T, T)] {
        &self.modes
    }

    pub fn is_disk(&self) -> bool {
        self.modes
            .iter()
            .all(|m| m.1 == T::zero() && m.2 == T::zero())
    }

    /// Copy with new base radius, same center and modes.
    pub fn with_r0(&self, r0: T) -> Result<Self> {
        Self::new(self.center, r0, self.modes.clone())
    }

    pub fn with_center(&self, center: [T; 2]) -> Self {
        Self {
            center,
            ..self.clone()
        }
    }

    /// Copy with new Fourier coefficients.
    pub fn with_modes(&self, modes: Vec<(u32, T, T)>) -> Result<Self> {
        Self::new(self.center, self.r0, modes)
    }

    /// `r(θ) / r0`.
    #[inline]
    pub fn relative_radius(&self, theta: T) -> T {
        let mut r = T::one();
        for &(k, a, b) in &self.modes {
            let (s, co) = (T::from_u32(k).expect("k") * theta).sin_cos();
            r += a * co + b * s;
        }
        r
    }

    #[inline]
    pub fn radius(&self, theta: T) -> T {
        self.r0 * self.relative_radius(theta)
    }

    /// `(r(θ), r'(θ))`.
    #[inline]
    pub fn radius_and_derivative(&self, theta: T) -> (T, T) {
        let (mut r, mut dr) = (T::one(), T::zero());
        for &(k, a, b) in &self.modes {
            let kf = T::from_u32(k).expect("k");
            let (s, co) = (kf * theta).sin_cos();
            r += a * co + b * s;
            dr += kf * (b * co - a * s);
        }
        (self.r0 * r, self.r0 * dr)
    }

    /// Boundary point at polar angle `θ`.
    pub fn point(&self, theta: T) -> [T; 2] {
        let r = self.radius(theta);
        let (s, co) = theta.sin_cos();
        [self.center[0] + r * co, self.center[1] + r * s]
    }

    /// Boundary point and its derivative with respect to `θ`.
    pub fn point_and_tangent(&self, theta: T) -> ([T; 2], [T; 2]) {
        let (r, dr) = self.radius_and_derivative(theta);
        let (s, co) = theta.sin_cos();
        (
            [self.center[0] + r * co, self.center[1] + r * s],
            [dr * co - r * s, dr * s + r * co],
        )
    }

    /// Upper bound on `max r(θ)`.
    pub fn max_radius_bound(&self) -> T {
        self.r0
            * (T::one()
                + self
                    .modes
                    .iter()
                    .fold(T::zero(), |s, m| s + m.1.abs() + m.2.abs()))
    }

    fn min_relative_radius(&self, n: usize) -> T {
        let h = T::TAU() / T::from_usize_lossy(n);
        (0..n)
            .map(|i| self.relative_radius(h * T::from_usize_lossy(i)))
            .fold(T::infinity(), T::min)
    }

    /// Exact area `π r0² (1 + ½ Σ (a_k² + b_k²))`.
    pub fn area(&self) -> T {
        let s = self
            .modes
            .iter()
            .fold(T::zero(), |s, m| s + m.1 * m.1 + m.2 * m.2);
        T::PI() * self.r0 * self.r0 * (T::one() + s * T::half())
    }

    /// Perimeter with the default node count.
    pub fn perimeter(&self) -> T {
        self.perimeter_with(PERIMETER_NODES)
    }

    /// `∫ sqrt(r² + r'²) dθ` by the periodic trapezoidal rule.
    pub fn perimeter_with(&self, nodes: usize) -> T {
        if self.modes.is_empty() {
            return T::TAU() * self.r0;
        }
        periodic_trapezoid(nodes, T::TAU(), |t| {
            let (r, dr) = self.radius_and_derivative(t);
            (r * r + dr * dr).sqrt()
        })
    }

    /// Dilation `λΩ` about the origin: center and base radius both scale.
    pub fn scale(&self, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::Argument(format!(
                "scale factor must be positive, got {lambda}"
            )));
        }
        Ok(Self {
            center: [self.center[0] * lambda, self.center[1] * lambda],
            r0: self.r0 * lambda,
            modes: self.modes.clone(),
        })
    }

    /// Area centroid.
    pub fn centroid(&self) -> [T; 2] {
        let n = 1024;
        let third = c::<T>(1.0 / 3.0);
        let mx = periodic_trapezoid(n, T::TAU(), |t| self.radius(t).powi(3) * third * t.cos());
        let my = periodic_trapezoid(n, T::TAU(), |t| self.radius(t).powi(3) * third * t.sin());
        let a = self.area();
        [self.center[0] + mx / a, self.center[1] + my / a]
    }

    /// Whether `p` lies strictly inside.
    pub fn contains(&self, p: [T; 2]) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let rho = (dx * dx + dy * dy).sqrt();
        if rho == T::zero() {
            return true;
        }
        rho < self.radius(dy.atan2(dx))
    }

    /// Raster of the cells whose centers lie inside the shape, on the grid of
    /// pitch `pitch` anchored at the origin.
    pub fn rasterize(&self, pitch: T) -> Result<RasterSet<T>> {
        RasterSet::from_star(self, pitch)
    }

    /// Closed boundary polyline with `n` vertices.
    pub fn polyline(&self, n: usize) -> Vec<[T; 2]> {
        let h = T::TAU() / T::from_usize_lossy(n);
        (0..n)
            .map(|i| self.point(h * T::from_usize_lossy(i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    type S = StarShape<f64>;

    #[test]
    fn area_examples() {
        assert!((S::unit_disk().area() - PI).abs() < 1e-15);
        assert!((S::disk([0.0; 2], 2.0).unwrap().area() - 4.0 * PI).abs() < 1e-14);
        let s = S::new([0.0; 2], 1.0, vec![(2, 0.1, 0.0)]).unwrap();
        assert!((s.area() - PI * 1.005).abs() < 1e-14);
    }

    #[test]
    fn area_matches_quadrature() {
        let s = S::new([0.3, -0.2], 1.2, vec![(2, 0.1, 0.05), (5, -0.03, 0.02)]).unwrap();
        let q = periodic_trapezoid(512, 2.0 * PI, |t| 0.5 * s.radius(t).powi(2));
        assert!((q - s.area()).abs() < 1e-13);
    }

    #[test]
    fn perimeter_examples() {
        assert!((S::unit_disk().perimeter() - 2.0 * PI).abs() < 1e-14);
        let s = S::disk([1.0, 1.0], 3.0).unwrap();
        assert!((s.perimeter() - 6.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn perimeter_matches_polyline_refinement() {
        let s = S::ellipse([0.0; 2], 1.5, 0.8, 24).unwrap();
        // Cauchy-refined polyline length as independent oracle.
        let length = |n: usize| {
            let pts = s.polyline(n);
            (0..n)
                .map(|i| {
                    let (a, b) = (pts[i], pts[(i + 1) % n]);
                    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
                })
                .sum::<f64>()
        };
        let mut n = 1024;
        let (mut prev, mut cur) = (length(n), length(2 * n));
        while (cur - prev).abs() > 1e-8 {
            n *= 2;
            prev = cur;
            cur = length(2 * n);
        }
        // Richardson step on the O(h²) polyline error.
        let extrap = cur + (cur - prev) / 3.0;
        assert!((s.perimeter() - extrap).abs() < 1e-8);
    }

    #[test]
    fn ellipse_fit_has_right_extremal_radii() {
        let s = S::ellipse([0.0; 2], 1.1, 1.0 / 1.1, 24).unwrap();
        assert!((s.radius(0.0) - 1.1).abs() < 1e-12);
        assert!((s.radius(PI / 2.0) - 1.0 / 1.1).abs() < 1e-12);
        assert!((s.area() - PI).abs() < 1e-12);
    }

    #[test]
    fn scale_examples() {
        let d = S::unit_disk().scale(2.0).unwrap();
        assert!((d.area() - 4.0 * PI).abs() < 1e-14);
        assert!((d.perimeter() - 4.0 * PI).abs() < 1e-14);
        let s = S::new([0.0; 2], 1.0, vec![(3, 0.1, 0.2)]).unwrap();
        assert_eq!(s.scale(1.0).unwrap(), s);
        let t = s.scale(3.0).unwrap();
        assert!((t.area() / s.area() - 9.0).abs() < 1e-12);
        assert!(s.scale(0.0).is_err());
    }

    #[test]
    fn validation() {
        assert!(S::new([0.0; 2], 0.0, vec![]).is_err());
        assert!(S::new([0.0; 2], 1.0, vec![(0, 0.1, 0.0)]).is_err());
        assert!(S::new([0.0; 2], 1.0, vec![(2, 1.2, 0.0)]).is_err());
        let s = S::new(
            [0.0; 2],
            1.0,
            vec![(3, 0.1, 0.0), (2, 0.05, 0.0), (3, 0.1, 0.1)],
        )
        .unwrap();
        assert_eq!(s.modes(), &[(2, 0.05, 0.0), (3, 0.2, 0.1)]);
    }

    #[test]
    fn json_format() {
        let s = S::new([0.5, 0.0], 1.0, vec![(2, 0.1, 0.0)]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"{"version":1,"center":[0.5,0.0],"r0":1.0,"modes":[[2,0.1,0.0]]}"#
        );
        let back: S = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let bare: S = serde_json::from_str(r#"{"center":[0,0],"r0":1}"#).unwrap();
        assert!(bare.is_disk());
        assert!(serde_json::from_str::<S>(r#"{"center":[0,0],"r0":-1}"#).is_err());
        assert!(serde_json::from_str::<S>(r#"{"center":[0,0],"r0":1,"extra":2}"#).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let s = StarShape::<f32>::new([0.0; 2], 1.0, vec![(2, 0.1, 0.0)]).unwrap();
        assert!((s.area() - std::f32::consts::PI * 1.005).abs() < 1e-5);
        assert!(s.perimeter() > 2.0 * std::f32::consts::PI);
    }

    fn arb_shape() -> impl Strategy<Value = S> {
        (
            0.3f64..3.0,
            prop::collection::vec((1u32..9, -0.08f64..0.08, -0.08f64..0.08), 0..5),
        )
            .prop_map(|(r0, modes)| S::new([0.0; 2], r0, modes).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn isoperimetric(s in arb_shape()) {
            let p = s.perimeter();
            let a = s.area();
            let gap = p * p - 4.0 * PI * a;
            prop_assert!(gap >= -1e-10 * p * p);
            if s.is_disk() {
                prop_assert!(gap.abs() < 1e-10 * p * p);
            }
        }

        #[test]
        fn scale_homogeneity(s in arb_shape(), lambda in 0.2f64..5.0) {
            let t = s.scale(lambda).unwrap();
            prop_assert!((t.area() - lambda * lambda * s.area()).abs() <= 1e-12 * t.area());
            prop_assert!((t.perimeter() - lambda * s.perimeter()).abs() <= 1e-12 * t.perimeter());
        }
    }
}
