//! Circular-arc geometry around the unit disk: the lens family through two
//! fixed boundary points, minimal curves with prescribed offset and area,
//! and the perimeter deficit ratio.
//!
//! A lens is the region between the unit arc from `P = (cos θ̄, sin θ̄)` to
//! `Q = (cos θ̄, −sin θ̄)` through `(1, 0)` and the arc through `P`, `Q` and
//! `S = (1 + δ, 0)`. Every arc is handled through its chord half-length and
//! signed sagitta, which keeps the formulas finite as the arc flattens.

mod curves;
mod svg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{c, sin_minus_x_cos_over_cube, sinc, x_minus_sin_over_cube, Real};

pub use curves::{
    deficit_ratio, gamma_arcs, min_curve_inner, min_curve_outer, CurveCase, GammaArcs,
    MinCurveResult, Side,
};
pub use svg::{lens_svg, min_curve_svg};

/// Margin kept from the ends of the offset range and from the flat chord.
pub const DOMAIN_MARGIN: f64 = 1e-9;

/// Arc with chord half-length `half_chord` and signed sagitta `sagitta`.
#[derive(Clone, Copy, Debug)]
struct ChordArc<T> {
    /// Half of the angle subtended at the arc center; negative when the
    /// arc bulges towards the origin.
    half_angle: T,
    half_chord: T,
}

impl<T: Real> ChordArc<T> {
    fn new(half_chord: T, sagitta: T) -> Self {
        Self {
            half_angle: T::two() * (sagitta / half_chord).atan(),
            half_chord,
        }
    }

    /// Signed radius; infinite for a flat arc.
    fn radius(&self) -> T {
        self.half_chord / self.half_angle.sin()
    }

    fn length(&self) -> T {
        T::two() * self.half_chord / sinc(self.half_angle)
    }

    /// Signed area between the chord and the arc,
    /// `ρ²(θ − sin θ cos θ) = 4c²θ·((2θ − sin 2θ)/(2θ)³)/sinc²θ`.
    fn segment_area(&self) -> T {
        let th = self.half_angle;
        let s = sinc(th);
        c::<T>(4.0) * self.half_chord * self.half_chord * th * x_minus_sin_over_cube(T::two() * th)
            / (s * s)
    }
}

/// A lens configuration and its derived quantities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LensState<T> {
    /// Polar angle of the fixed points `P`, `Q`.
    pub contact_angle: T,
    /// Signed offset of the apex `S` from the unit circle.
    pub apex_offset: T,
    /// Abscissa of the arc center.
    pub center_abscissa: T,
    /// Arc radius.
    pub radius: T,
    /// Half of the opening angle at the arc center.
    pub half_opening: T,
    /// Arc length.
    pub arc_length: T,
    /// Signed area between the arc and the unit arc, positive outside.
    pub enclosed_area: T,
}

/// Derivatives of the lens quantities with respect to the apex offset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LensDerivatives<T> {
    pub radius: T,
    pub half_opening: T,
    pub arc_length: T,
    pub enclosed_area: T,
}

fn check_angle<T: Real>(contact_angle: T) -> Result<()> {
    if !(contact_angle > T::zero() && contact_angle <= T::FRAC_PI_2()) {
        return Err(Error::Domain(format!(
            "contact angle {contact_angle} outside (0, pi/2]"
        )));
    }
    Ok(())
}

/// Largest admissible `|δ|`, `cos θ̄ / 8` less the margin.
pub fn offset_bound<T: Real>(contact_angle: T) -> T {
    contact_angle.cos() / c(8.0) - c(DOMAIN_MARGIN)
}

/// Flat offset `cos θ̄ − 1`, where the arc through `P`, `Q`, `S` is the chord.
pub fn flat_offset<T: Real>(contact_angle: T) -> T {
    contact_angle.cos() - T::one()
}

fn check_domain<T: Real>(contact_angle: T, delta: T) -> Result<()> {
    check_angle(contact_angle)?;
    if delta == T::zero() {
        return Ok(());
    }
    if !(delta.abs() < offset_bound(contact_angle)) {
        return Err(Error::Domain(format!(
            "apex offset {delta} outside |delta| < cos(theta)/8 at contact angle {contact_angle}"
        )));
    }
    if (delta - flat_offset(contact_angle)).abs() <= c(DOMAIN_MARGIN) {
        return Err(Error::Domain(format!(
            "apex offset {delta} makes the arc flat"
        )));
    }
    Ok(())
}

fn unit_arc<T: Real>(contact_angle: T) -> ChordArc<T> {
    let (s, co) = contact_angle.sin_cos();
    ChordArc::new(s, T::one() - co)
}

fn arc_at<T: Real>(contact_angle: T, delta: T) -> ChordArc<T> {
    let (s, co) = contact_angle.sin_cos();
    ChordArc::new(s, T::one() + delta - co)
}

/// Signed lens area for any offset, including beyond the flat chord.
fn area_unchecked<T: Real>(contact_angle: T, delta: T) -> T {
    arc_at(contact_angle, delta).segment_area() - unit_arc(contact_angle).segment_area()
}

/// Solves the circle through `P`, `Q`, `S` with center on the axis.
pub fn lens_state<T: Real>(contact_angle: T, delta: T) -> Result<LensState<T>> {
    check_domain(contact_angle, delta)?;
    if delta == T::zero() {
        return Ok(LensState {
            contact_angle,
            apex_offset: delta,
            center_abscissa: T::zero(),
            radius: T::one(),
            half_opening: contact_angle,
            arc_length: T::two() * contact_angle,
            enclosed_area: T::zero(),
        });
    }
    let arc = arc_at(contact_angle, delta);
    let radius = arc.radius();
    Ok(LensState {
        contact_angle,
        apex_offset: delta,
        center_abscissa: T::one() + delta - radius,
        radius,
        half_opening: arc.half_angle,
        arc_length: arc.length(),
        enclosed_area: area_unchecked(contact_angle, delta),
    })
}

/// `ρ′ = −cos θ/(1 − cos θ)`, `θ′ = sin θ/(ρ(1 − cos θ))`,
/// `τ′ = 2(sin θ − θ cos θ)/(1 − cos θ)`, `μ′ = ρτ′` at the current state.
pub fn lens_derivatives<T: Real>(contact_angle: T, delta: T) -> Result<LensDerivatives<T>> {
    let st = lens_state(contact_angle, delta)?;
    let th = st.half_opening;
    let half = (th * T::half()).sin();
    let one_minus_cos = T::two() * half * half;
    let arc_length = T::two() * th * th * th * sin_minus_x_cos_over_cube(th) / one_minus_cos;
    Ok(LensDerivatives {
        radius: -th.cos() / one_minus_cos,
        half_opening: th.sin() / (st.radius * one_minus_cos),
        arc_length,
        enclosed_area: st.radius * arc_length,
    })
}

/// `τ(δ) − τ(0) − μ(1 + (cos θ̄/6) δ)`; nonnegative on the domain.
pub fn lens_inequality_slack<T: Real>(contact_angle: T, delta: T) -> Result<T> {
    lens_inequality_slack_with(contact_angle, delta, c(1.0 / 6.0))
}

/// Slack with the constant `factor` in place of `1/6`.
pub fn lens_inequality_slack_with<T: Real>(contact_angle: T, delta: T, factor: T) -> Result<T> {
    let st = lens_state(contact_angle, delta)?;
    let mu = st.enclosed_area;
    Ok(st.arc_length
        - T::two() * contact_angle
        - mu * (T::one() + factor * contact_angle.cos() * delta))
}

/// The offset whose lens encloses the signed area `target`, by bisection.
pub fn lens_from_area<T: Real>(contact_angle: T, target: T) -> Result<T> {
    check_angle(contact_angle)?;
    if target == T::zero() {
        return Ok(T::zero());
    }
    let bound = offset_bound(contact_angle);
    let (mut lo, mut hi) = (-bound, bound);
    let (a_lo, a_hi) = (
        area_unchecked(contact_angle, lo),
        area_unchecked(contact_angle, hi),
    );
    if !(target >= a_lo && target <= a_hi) {
        return Err(Error::Range(format!(
            "area {target} outside the attainable range [{a_lo}, {a_hi}]"
        )));
    }
    bisect_increasing(
        |d| area_unchecked(contact_angle, d),
        target,
        &mut lo,
        &mut hi,
    );
    let delta = (lo + hi) * T::half();
    if (delta - flat_offset(contact_angle)).abs() <= c(DOMAIN_MARGIN) {
        return Err(Error::Range(format!(
            "area {target} is attained at the flat chord"
        )));
    }
    Ok(delta)
}

/// Bisection for `f(x) = target` with `f` increasing on `[lo, hi]`.
pub(crate) fn bisect_increasing<T: Real, F: Fn(T) -> T>(f: F, target: T, lo: &mut T, hi: &mut T) {
    for _ in 0..300 {
        let mid = (*lo + *hi) * T::half();
        if mid <= *lo || mid >= *hi {
            break;
        }
        if f(mid) < target {
            *lo = mid;
        } else {
            *hi = mid;
        }
    }
}

/// `μ′` where the arc is flat, `(4/3) sin θ̄`.
pub fn mu_prime_at_flat<T: Real>(contact_angle: T) -> Result<T> {
    check_angle(contact_angle)?;
    Ok(c::<T>(4.0 / 3.0) * contact_angle.sin())
}

/// One-sided second-order difference of `μ` at the flat offset with step `h`.
pub fn mu_prime_at_flat_fd<T: Real>(contact_angle: T, h: T) -> Result<T> {
    check_angle(contact_angle)?;
    if !(h > T::zero()) {
        return Err(Error::Argument(format!("step must be positive, got {h}")));
    }
    let d1 = flat_offset(contact_angle);
    let mu = |d: T| area_unchecked(contact_angle, d);
    Ok((-c::<T>(3.0) * mu(d1) + c::<T>(4.0) * mu(d1 + h) - mu(d1 + T::two() * h)) / (T::two() * h))
}

/// One row of a lens grid check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LensGridRow {
    pub contact_angle: f64,
    pub apex_offset: f64,
    pub slack: f64,
    /// Slack with `cos θ̄ / 4`, reported for positive offsets.
    pub strong_slack: Option<f64>,
    /// `|η + ρ − 1 − δ|`.
    pub apex_residual: f64,
    /// `|ρ sin θ − sin θ̄|`.
    pub chord_residual: f64,
}

/// Evaluates the lens identities and inequality on an `n_angles × n_offsets`
/// grid covering the open domain; offsets at the flat chord are skipped.
pub fn lens_grid(n_angles: usize, n_offsets: usize) -> Result<Vec<LensGridRow>> {
    if n_angles == 0 || n_offsets < 2 {
        return Err(Error::Argument(
            "grid needs >= 1 angle and >= 2 offsets".into(),
        ));
    }
    let mut rows = Vec::with_capacity(n_angles * n_offsets);
    for i in 0..n_angles {
        let theta = std::f64::consts::FRAC_PI_2 * (i as f64 + 0.5) / n_angles as f64;
        let bound = offset_bound::<f64>(theta);
        for j in 0..n_offsets {
            let delta = -bound + 2.0 * bound * j as f64 / (n_offsets - 1) as f64;
            let st = match lens_state(theta, delta) {
                Ok(st) => st,
                Err(Error::Domain(_)) => continue,
                Err(e) => return Err(e),
            };
            let slack = lens_inequality_slack(theta, delta)?;
            let strong_slack = if delta > 0.0 {
                Some(lens_inequality_slack_with(theta, delta, 0.25)?)
            } else {
                None
            };
            rows.push(LensGridRow {
                contact_angle: theta,
                apex_offset: delta,
                slack,
                strong_slack,
                apex_residual: (st.center_abscissa + st.radius - 1.0 - delta).abs(),
                chord_residual: (st.radius * st.half_opening.sin() - theta.sin()).abs(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_offset_is_the_unit_arc() {
        let st = lens_state(0.7f64, 0.0).unwrap();
        assert_eq!(
            (
                st.center_abscissa,
                st.radius,
                st.half_opening,
                st.arc_length,
                st.enclosed_area
            ),
            (0.0, 1.0, 0.7, 1.4, 0.0)
        );
    }

    #[test]
    fn three_point_circle() {
        // Independent fit: center (e, 0) equidistant from P and S.
        let (tb, d) = (PI / 3.0, 0.05);
        let st = lens_state(tb, d).unwrap();
        let (px, py) = (tb.cos(), tb.sin());
        let sx = 1.0 + d;
        let mut lo = -10.0;
        let mut hi = sx - 1e-9;
        for _ in 0..200 {
            let e = 0.5 * (lo + hi);
            let f = ((px - e).powi(2) + py * py).sqrt() - (sx - e);
            if f < 0.0 {
                lo = e;
            } else {
                hi = e;
            }
        }
        let e = 0.5 * (lo + hi);
        assert!((st.center_abscissa - e).abs() < 1e-12);
        let rp = ((px - e).powi(2) + py * py).sqrt();
        assert!((rp - st.radius).abs() < 1e-12);
        assert!((sx - e - st.radius).abs() < 1e-12);
        // Area by shoelace on the two arcs.
        let n = 200_000;
        let mut pts = Vec::with_capacity(2 * n + 2);
        for k in 0..=n {
            let a = -st.half_opening + 2.0 * st.half_opening * k as f64 / n as f64;
            pts.push((e + st.radius * a.cos(), st.radius * a.sin()));
        }
        for k in 0..=n {
            let a = tb - 2.0 * tb * k as f64 / n as f64;
            pts.push((a.cos(), a.sin()));
        }
        let mut area = 0.0;
        for w in 0..pts.len() {
            let (a, b) = (pts[w], pts[(w + 1) % pts.len()]);
            area += a.0 * b.1 - a.1 * b.0;
        }
        assert!((0.5 * area - st.enclosed_area).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        assert!(lens_state(0.0f64, 0.0).is_err());
        assert!(lens_state(1.7f64, 0.0).is_err());
        assert!(lens_state(PI / 3.0, 0.2).is_err());
        // Flat chord lies inside the offset range for small angles.
        let tb = 0.1f64;
        assert!(flat_offset(tb).abs() < offset_bound(tb));
        assert!(lens_state(tb, flat_offset(tb)).is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = lens_derivatives(PI / 2.0, 0.0).unwrap();
        assert!(d.radius.abs() < 1e-15);
        assert!((d.half_opening - 1.0).abs() < 1e-15);
        assert!((d.arc_length - 2.0).abs() < 1e-15);
        assert!((d.enclosed_area - 2.0).abs() < 1e-15);
        let d = lens_derivatives(PI / 3.0, 0.0).unwrap();
        let s3 = 3f64.sqrt();
        assert!((d.radius + 1.0).abs() < 1e-14);
        assert!((d.half_opening - s3).abs() < 1e-14);
        let expected = 2.0 * (s3 / 2.0 - PI / 6.0) / 0.5;
        assert!((d.arc_length - expected).abs() < 1e-14);
        assert!((d.enclosed_area - expected).abs() < 1e-14);
    }

    fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        // Richardson-extrapolated central difference.
        let h = 1e-4;
        let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for (tb, d0) in [(PI / 3.0, 0.03), (0.4, -0.1), (1.2, 0.02), (0.2, -0.05)] {
            let d = lens_derivatives(tb, d0).unwrap();
            let st = |x: f64| lens_state(tb, x).unwrap();
            let pairs = [
                (d.radius, central(|x| st(x).radius, d0)),
                (d.half_opening, central(|x| st(x).half_opening, d0)),
                (d.arc_length, central(|x| st(x).arc_length, d0)),
                (d.enclosed_area, central(|x| st(x).enclosed_area, d0)),
            ];
            for (a, b) in pairs {
                assert!(
                    (a - b).abs() < 1e-6 * b.abs().max(1e-3),
                    "{tb} {d0}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn inequality_examples() {
        assert_eq!(lens_inequality_slack(0.9f64, 0.0).unwrap(), 0.0);
        assert!(lens_inequality_slack(PI / 4.0, 0.05).unwrap() >= 0.0);
        assert!(lens_inequality_slack(PI / 4.0, -0.05).unwrap() >= 0.0);
        assert!(lens_inequality_slack_with(PI / 4.0, 0.05, 0.25).unwrap() >= 0.0);
    }

    #[test]
    fn area_inversion() {
        assert_eq!(lens_from_area(1.0f64, 0.0).unwrap(), 0.0);
        let d = lens_from_area(PI / 3.0, 0.02).unwrap();
        assert!((lens_state(PI / 3.0, d).unwrap().enclosed_area - 0.02).abs() < 1e-12);
        assert!(matches!(
            lens_from_area(PI / 3.0, 5.0),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn flat_slope() {
        assert!((mu_prime_at_flat(PI / 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((mu_prime_at_flat(PI / 6.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let fd = mu_prime_at_flat_fd(PI / 3.0, 1e-5).unwrap();
        assert!((fd - mu_prime_at_flat(PI / 3.0).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn grid_identities_and_slack() {
        let rows = lens_grid(100, 101).unwrap();
        assert!(rows.len() >= 10_000 - 200);
        for r in &rows {
            assert!(r.apex_residual < 1e-12, "{r:?}");
            assert!(r.chord_residual < 1e-12, "{r:?}");
            assert!(r.slack >= -1e-12, "{r:?}");
            if let Some(s) = r.strong_slack {
                assert!(s >= -1e-12, "{r:?}");
            }
        }
    }

    #[test]
    fn area_monotone_and_convex_below_zero() {
        for tb in [0.2, 0.7, 1.2, 1.5] {
            let b = offset_bound::<f64>(tb);
            let n = 400;
            let xs: Vec<f64> = (0..=n)
                .map(|i| -b + 2.0 * b * i as f64 / n as f64)
                .collect();
            let mu: Vec<f64> = xs.iter().map(|&d| area_unchecked(tb, d)).collect();
            for w in mu.windows(2) {
                assert!(w[1] > w[0]);
            }
            let d1 = flat_offset(tb);
            for i in 1..n {
                if xs[i] > d1 && xs[i] < 0.0 {
                    assert!(
                        mu[i + 1] - 2.0 * mu[i] + mu[i - 1] >= -1e-14,
                        "{tb} {}",
                        xs[i]
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn area_round_trip(tb in 0.05f64..1.55, u in -0.99f64..0.99) {
            let d = u * offset_bound(tb);
            prop_assume!((d - flat_offset(tb)).abs() > 1e-6);
            let mu = lens_state(tb, d).unwrap().enclosed_area;
            let back = lens_from_area(tb, mu).unwrap();
            prop_assert!((back - d).abs() < 1e-10);
            prop_assert!(mu.signum() == d.signum() || d == 0.0);
        }
    }
}
