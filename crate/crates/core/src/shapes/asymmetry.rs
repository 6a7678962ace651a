//! Symmetric differences and the Fraenkel asymmetry against unit disks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gl_f64;
use crate::real::{c, Real};

use super::{StarShape, DEFAULT_PITCH};

const PANELS: usize = 4096;
const PANEL_NODES: usize = 6;

/// Optimal unit-disk translation and the asymmetry quantities around it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryReport<T> {
    pub optimal_translation: [T; 2],
    pub asymmetry: T,
    pub nu: T,
    pub delta_plus: T,
    pub delta_minus: T,
}

/// Integrates a 2π-periodic piecewise smooth function. `state` labels the
/// smooth branch at an angle; panels whose ends disagree are split at the
/// located switch.
fn piecewise_periodic<T, F, S>(f: F, state: S) -> T
where
    T: Real,
    F: Fn(T) -> T,
    S: Fn(T) -> u8,
{
    let h = T::TAU() / T::from_usize_lossy(PANELS);
    let rule = gl_f64(PANEL_NODES);
    let gl = |a: T, b: T| -> T {
        let m = (a + b) * T::half();
        let r = (b - a) * T::half();
        rule.iter()
            .fold(T::zero(), |s, &(x, w)| s + c::<T>(w) * f(m + r * c::<T>(x)))
            * r
    };
    let mut total = T::zero();
    for i in 0..PANELS {
        let a = h * T::from_usize_lossy(i);
        let b = a + h;
        let (sa, sb) = (state(a), state(b));
        if sa == sb {
            total += gl(a, b);
            continue;
        }
        // One switch per panel is the generic case at this resolution.
        let (mut lo, mut hi) = (a, b);
        for _ in 0..60 {
            let mid = (lo + hi) * T::half();
            if state(mid) == sa {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() * (T::one() + hi.abs()) {
                break;
            }
        }
        let s = (lo + hi) * T::half();
        total += gl(a, s) + gl(s, b);
    }
    total
}

/// `(sin θ, cos θ, r(θ))` at the panel ends and quadrature nodes used by
/// [`piecewise_periodic`], computed once per shape.
struct AngularSamples<T> {
    ends: Vec<[T; 3]>,
    nodes: Vec<[T; 3]>,
    weights: Vec<T>,
}

impl<T: Real> AngularSamples<T> {
    fn new(s: &StarShape<T>) -> Self {
        let h = T::TAU() / T::from_usize_lossy(PANELS);
        let rule = gl_f64(PANEL_NODES);
        let at = |t: T| {
            let (sn, cs) = t.sin_cos();
            [sn, cs, s.radius(t)]
        };
        let ends = (0..=PANELS)
            .map(|i| at(h * T::from_usize_lossy(i)))
            .collect();
        let mut nodes = Vec::with_capacity(PANELS * PANEL_NODES);
        for i in 0..PANELS {
            let a = h * T::from_usize_lossy(i);
            let m = a + h * T::half();
            for &(x, _) in rule.iter() {
                nodes.push(at(m + h * T::half() * c::<T>(x)));
            }
        }
        let weights = rule
            .iter()
            .map(|&(_, w)| c::<T>(w) * h * T::half())
            .collect();
        Self {
            ends,
            nodes,
            weights,
        }
    }
}

/// `|s Δ B_radius(center)|` by angular integration about the shape's center.
pub fn disk_symmetric_difference<T: Real>(s: &StarShape<T>, center: [T; 2], radius: T) -> T {
    disk_difference_sampled(s, &AngularSamples::new(s), center, radius)
}

fn disk_difference_sampled<T: Real>(
    s: &StarShape<T>,
    samples: &AngularSamples<T>,
    center: [T; 2],
    radius: T,
) -> T {
    let sc = s.center();
    let w = [sc[0] - center[0], sc[1] - center[1]];
    let w2 = w[0] * w[0] + w[1] * w[1];
    let r2 = radius * radius;
    // Ray sc + ρe meets the disk for ρ in [-we - root, -we + root].
    let chord = |p: &[T; 3]| -> Option<(T, T)> {
        let we = w[0] * p[1] + w[1] * p[0];
        let disc = we * we - w2 + r2;
        if disc <= T::zero() {
            return None;
        }
        let root = disc.sqrt();
        Some((-we - root, -we + root))
    };
    let intersection = |p: &[T; 3]| -> T {
        match chord(p) {
            Some((lo, hi)) => {
                let lo = lo.max(T::zero());
                let hi = hi.min(p[2]);
                if hi > lo {
                    (hi * hi - lo * lo) * T::half()
                } else {
                    T::zero()
                }
            }
            None => T::zero(),
        }
    };
    let state = |p: &[T; 3]| -> u8 {
        match chord(p) {
            None => 0,
            Some((lo, hi)) => {
                let mut tag = 1u8;
                if lo > T::zero() {
                    tag |= 2;
                }
                if hi < p[2] {
                    tag |= 4;
                }
                if lo >= p[2] || hi <= T::zero() {
                    tag |= 8;
                }
                tag
            }
        }
    };
    let at = |t: T| {
        let (sn, cs) = t.sin_cos();
        [sn, cs, s.radius(t)]
    };
    let h = T::TAU() / T::from_usize_lossy(PANELS);
    let rule = gl_f64(PANEL_NODES);
    let gl = |a: T, b: T| -> T {
        let m = (a + b) * T::half();
        let r = (b - a) * T::half();
        rule.iter().fold(T::zero(), |acc, &(x, wt)| {
            acc + c::<T>(wt) * intersection(&at(m + r * c::<T>(x)))
        }) * r
    };
    let mut inter = T::zero();
    for i in 0..PANELS {
        let sa = state(&samples.ends[i]);
        if sa == state(&samples.ends[i + 1]) {
            let nodes = &samples.nodes[i * PANEL_NODES..(i + 1) * PANEL_NODES];
            inter += nodes
                .iter()
                .zip(&samples.weights)
                .fold(T::zero(), |acc, (p, &wt)| acc + wt * intersection(p));
            continue;
        }
        // One switch per panel is the generic case at this resolution.
        let a = h * T::from_usize_lossy(i);
        let b = a + h;
        let (mut lo, mut hi) = (a, b);
        for _ in 0..60 {
            let mid = (lo + hi) * T::half();
            if state(&at(mid)) == sa {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() * (T::one() + hi.abs()) {
                break;
            }
        }
        let split = (lo + hi) * T::half();
        inter += gl(a, split) + gl(split, b);
    }
    let total = s.area() + T::PI() * r2 - T::two() * inter;
    total.max(T::zero())
}

/// `|a Δ b|`. Exact angular integration for a shared center or when one side
/// is a disk; otherwise cell counting at the default pitch.
pub fn symmetric_difference<T: Real>(a: &StarShape<T>, b: &StarShape<T>) -> Result<T> {
    if a.center() == b.center() {
        let half = T::half();
        let f = |t: T| (a.radius(t).powi(2) - b.radius(t).powi(2)).abs() * half;
        let state = |t: T| u8::from(a.radius(t) > b.radius(t));
        return Ok(piecewise_periodic(f, state));
    }
    if b.is_disk() {
        return Ok(disk_symmetric_difference(a, b.center(), b.r0()));
    }
    if a.is_disk() {
        return Ok(disk_symmetric_difference(b, a.center(), a.r0()));
    }
    let pitch = T::lit(DEFAULT_PITCH);
    a.rasterize(pitch)?
        .symmetric_difference_area(&b.rasterize(pitch)?)
}

/// Locates the unit disk closest to `s` in symmetric difference, by pattern
/// search started at the centroid, and reports `ν`, `δ⁺`, `δ⁻` about it.
pub fn fraenkel_center<T: Real>(s: &StarShape<T>) -> Result<AsymmetryReport<T>> {
    let area = s.area();
    let tol = if T::epsilon() > T::lit(1e-10) {
        1e-5
    } else {
        1e-9
    };
    if (area - T::PI()).abs() > T::lit(tol) * T::PI() {
        return Err(Error::Precondition(format!(
            "asymmetry needs area π, got {area}"
        )));
    }
    let samples = AngularSamples::new(s);
    let objective = |z: [T; 2]| disk_difference_sampled(s, &samples, z, T::one());
    let mut z = if s.is_disk() {
        s.center()
    } else {
        s.centroid()
    };
    let mut best = objective(z);
    let mut step = T::lit(0.1);
    let min_step = T::lit(1e-5);
    let dirs: [[f64; 2]; 8] = [
        [1.0, 0.0],
        [-1.0, 0.0],
        [0.0, 1.0],
        [0.0, -1.0],
        [0.5f64.sqrt(), 0.5f64.sqrt()],
        [-0.5f64.sqrt(), 0.5f64.sqrt()],
        [0.5f64.sqrt(), -0.5f64.sqrt()],
        [-0.5f64.sqrt(), -0.5f64.sqrt()],
    ];
    while step >= min_step && best > T::zero() {
        let mut improved = false;
        for d in dirs {
            let cand = [z[0] + step * c::<T>(d[0]), z[1] + step * c::<T>(d[1])];
            let v = objective(cand);
            if v < best {
                best = v;
                z = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            step = step * T::half();
        }
    }
    let (dmin, dmax) = distance_extremes(s, z);
    Ok(AsymmetryReport {
        optimal_translation: z,
        asymmetry: best,
        nu: best * T::half(),
        delta_plus: (dmax - T::one()).max(T::zero()),
        delta_minus: (T::one() - dmin).max(T::zero()).min(T::one()),
    })
}

/// Minimum and maximum of `|x − z|` over the boundary.
fn distance_extremes<T: Real>(s: &StarShape<T>, z: [T; 2]) -> (T, T) {
    let n = 4096;
    let h = T::TAU() / T::from_usize_lossy(n);
    let d2 = |t: T| {
        let p = s.point(t);
        (p[0] - z[0]).powi(2) + (p[1] - z[1]).powi(2)
    };
    let (mut imin, mut imax) = (0, 0);
    let (mut vmin, mut vmax) = (T::infinity(), T::neg_infinity());
    for i in 0..n {
        let v = d2(h * T::from_usize_lossy(i));
        if v < vmin {
            vmin = v;
            imin = i;
        }
        if v > vmax {
            vmax = v;
            imax = i;
        }
    }
    let refine = |i: usize, sign: T| -> T {
        let t0 = h * T::from_usize_lossy(i);
        let f = |t: T| sign * d2(t);
        // Golden section on the bracketing panels.
        let g = c::<T>(0.5 * (5f64.sqrt() - 1.0));
        let (mut a, mut b) = (t0 - h, t0 + h);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..80 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = f(x2);
            }
        }
        (sign * f1.min(f2).min(f(t0))).sqrt()
    };
    let dmin = refine(imin, T::one()).min(vmin.sqrt());
    let dmax = refine(imax, -T::one()).max(vmax.sqrt());
    (dmin, dmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    type S = StarShape<f64>;

    /// Area of the intersection of two disks of radius `r` at distance `d`.
    fn lens_area(r: f64, d: f64) -> f64 {
        2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt()
    }

    #[test]
    fn basic_examples() {
        let b = S::unit_disk();
        assert_eq!(symmetric_difference(&b, &b).unwrap(), 0.0);
        let b2 = S::disk([0.0; 2], 2.0).unwrap();
        let v = symmetric_difference(&b, &b2).unwrap();
        assert!((v - 3.0 * PI).abs() < 1e-11, "{v}");
    }

    #[test]
    fn translated_disk_matches_lens_formula_and_raster() {
        let b = S::unit_disk();
        let t = S::disk([0.5, 0.0], 1.0).unwrap();
        let expected = 2.0 * PI - 2.0 * lens_area(1.0, 0.5);
        let got = symmetric_difference(&b, &t).unwrap();
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
        let h = 1.0 / 512.0;
        let ras = b
            .rasterize(h)
            .unwrap()
            .symmetric_difference_area(&t.rasterize(h).unwrap())
            .unwrap();
        assert!((ras - expected).abs() < 8.0 * PI * h);
    }

    #[test]
    fn disk_difference_is_symmetric_in_role() {
        let s = S::new([0.1, 0.0], 1.0, vec![(2, 0.1, 0.0)]).unwrap();
        let d = S::disk([0.3, -0.2], 0.9).unwrap();
        let ab = symmetric_difference(&s, &d).unwrap();
        let ba = symmetric_difference(&d, &s).unwrap();
        assert!((ab - ba).abs() < 1e-12);
        let h = 1.0 / 512.0;
        let ras = s
            .rasterize(h)
            .unwrap()
            .symmetric_difference_area(&d.rasterize(h).unwrap())
            .unwrap();
        assert!((ras - ab).abs() < 0.02);
    }

    #[test]
    fn unit_disk_has_zero_asymmetry() {
        let r = fraenkel_center(&S::unit_disk()).unwrap();
        assert!(r.asymmetry < 1e-12);
        assert!(r.delta_plus < 1e-12);
        assert!(r.delta_minus < 1e-12);
        assert!(fraenkel_center(&S::disk([0.0; 2], 1.1).unwrap()).is_err());
    }

    #[test]
    fn ellipse_deltas() {
        let e = S::ellipse([0.0; 2], 1.1, 1.0 / 1.1, 24).unwrap();
        let r = fraenkel_center(&e).unwrap();
        assert!((r.delta_plus - 0.1).abs() < 1e-9);
        assert!((r.delta_minus - (1.0 - 1.0 / 1.1)).abs() < 1e-9);
        assert!(r.optimal_translation[0].abs() < 1e-4 && r.optimal_translation[1].abs() < 1e-4);
        assert_eq!(r.nu, r.asymmetry / 2.0);
    }

    #[test]
    fn pattern_search_matches_grid_search() {
        let s = S::new(
            [0.0; 2],
            1.0,
            vec![(2, 0.06, -0.03), (3, 0.04, 0.02), (5, -0.02, 0.03)],
        )
        .unwrap();
        let s = s.with_r0(1.0 / (s.area() / PI).sqrt()).unwrap();
        let r = fraenkel_center(&s).unwrap();
        let mut grid_best = f64::INFINITY;
        for i in -20..=20 {
            for j in -20..=20 {
                let z = [i as f64 * 2.5e-3, j as f64 * 2.5e-3];
                grid_best = grid_best.min(disk_symmetric_difference(&s, z, 1.0));
            }
        }
        assert!(
            r.asymmetry <= grid_best + 1e-6,
            "{} vs {grid_best}",
            r.asymmetry
        );
        if r.optimal_translation[0].hypot(r.optimal_translation[1]) < 1e-3 {
            let n = 20000;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for k in 0..n {
                let v = s.radius(2.0 * PI * k as f64 / n as f64);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            assert!((r.delta_plus - (hi - 1.0)).abs() < 2e-3);
            assert!((r.delta_minus - (1.0 - lo)).abs() < 2e-3);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn translation_equivariance(vx in -2.0f64..2.0, vy in -2.0f64..2.0) {
            let r = fraenkel_center(&S::disk([vx, vy], 1.0).unwrap()).unwrap();
            prop_assert!(r.asymmetry < 1e-10);
            prop_assert!((r.optimal_translation[0] - vx).abs() < 1e-5);
            prop_assert!((r.optimal_translation[1] - vy).abs() < 1e-5);
        }

        #[test]
        fn angular_matches_raster_for_centered_shapes(
            a2 in -0.1f64..0.1, b3 in -0.1f64..0.1, a4 in -0.05f64..0.05,
        ) {
            let s = S::new([0.0; 2], 1.0, vec![(2, a2, 0.0), (3, 0.0, b3), (4, a4, 0.0)]).unwrap();
            let s = s.with_r0(1.0 / (s.area() / PI).sqrt()).unwrap();
            let b = S::unit_disk();
            let exact = symmetric_difference(&s, &b).unwrap();
            let h = 1.0 / 256.0;
            let ras = s.rasterize(h).unwrap()
                .symmetric_difference_area(&b.rasterize(h).unwrap()).unwrap();
            prop_assert!((exact - ras).abs() < 4.0 * 2.0 * PI * h);
        }

        #[test]
        fn deltas_bound_the_support(a2 in -0.1f64..0.1, b3 in -0.1f64..0.1) {
            let s = S::new([0.0; 2], 1.0, vec![(2, a2, 0.0), (3, 0.0, b3)]).unwrap();
            let s = s.with_r0(1.0 / (s.area() / PI).sqrt()).unwrap();
            let r = fraenkel_center(&s).unwrap();
            let z = r.optimal_translation;
            for p in s.polyline(2048) {
                let d = (p[0] - z[0]).hypot(p[1] - z[1]);
                prop_assert!(d <= 1.0 + r.delta_plus + 1e-9);
                prop_assert!(d >= 1.0 - r.delta_minus - 1e-9);
            }
        }
    }
}
