//! Shortest curves around the unit disk `B` with prescribed maximal offset
//! and enclosed area, the single arcs used to compare with them, and the
//! perimeter deficit ratio.
//!
//! Outside `B` the free boundary of a minimizer consists of two symmetric
//! arcs of equal radius, each tangent to `∂B` at a contact point
//! `(cos θ, ± sin θ)`. They either meet with a corner on the axis at the
//! prescribed offset, or meet tangentially closer to `B` and continue with a
//! radial segment that is traversed twice. Inside `B` the arcs must curve
//! towards the interior and the same two alternatives occur. When the area
//! is large enough that a disk of that area fits, the minimizer is that disk.
//!
//! For a fixed offset both families are parametrized by the contact angle
//! alone, and the enclosed area is increasing in it, so each minimizer is
//! found by a single bisection.

use serde::{Deserialize, Serialize};

use super::bisect_increasing;
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::real::{c, sinc, Real};
use crate::shapes::{fraenkel_center, StarShape};

/// Shape of a minimal curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveCase {
    /// Outward arcs bending like `∂B`, meeting at a corner.
    ConvexCorner,
    /// Straight tangent segments meeting at a corner.
    StraightCorner,
    /// Outward arcs bending away from `B`, meeting at a corner.
    ConcaveCorner,
    /// Outward arcs meeting tangentially, then a doubled radial segment.
    TangentialSpike,
    /// A disk containing `B` that touches the offset circle at one point.
    DetachedCircle,
    /// Inward arcs meeting at a corner.
    InnerCorner,
    /// Inward arcs meeting tangentially, then a doubled radial segment.
    InnerTangentialSpike,
    /// A disk inside `B` that touches the offset circle at one point.
    InnerDetachedCircle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Outer,
    Inner,
}

/// A minimal curve for offset `t` and area `beta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinCurveResult<T> {
    pub side: Side,
    pub t: T,
    pub beta: T,
    /// Total length, the doubled segment counted twice.
    pub length: T,
    /// Polar angle of the upper contact point; `π` for detached circles.
    pub contact_angle: T,
    /// Offset where the two arcs meet; equals `t` unless there is a segment.
    pub t_eff: T,
    pub case: CurveCase,
    /// Signed curvature of the free arcs, positive when bending like `∂B`
    /// (outer) or towards the interior (inner); for detached circles the
    /// circle's curvature.
    pub curvature: T,
    /// Length of one free arc.
    pub arc_length: T,
}

impl<T: Real> MinCurveResult<T> {
    /// `beta / (t_eff · contact_angle)`.
    pub fn comparability(&self) -> T {
        self.beta / (self.t_eff * self.contact_angle)
    }

    /// The free part of the curve as a polyline from the lower contact point
    /// to the upper one, through the point at the prescribed offset.
    pub fn free_boundary(&self, n: usize) -> Vec<[T; 2]> {
        let n = n.max(2);
        if matches!(
            self.case,
            CurveCase::DetachedCircle | CurveCase::InnerDetachedCircle
        ) {
            let r = T::one() / self.curvature;
            let far = match self.side {
                Side::Outer => T::one() + self.t,
                Side::Inner => T::one() - self.t,
            };
            let cx = match self.side {
                Side::Outer => far - r,
                Side::Inner => far + r,
            };
            let start = if self.side == Side::Outer {
                T::zero()
            } else {
                T::PI()
            };
            return (0..=n)
                .map(|i| {
                    let a = start + T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(n);
                    [cx + r * a.cos(), r * a.sin()]
                })
                .collect();
        }
        let k = self.curvature;
        let upper: Vec<[T; 2]> = (0..=n)
            .map(|i| {
                arc_point(
                    self.contact_angle,
                    k,
                    self.arc_length * T::from_usize_lossy(i) / T::from_usize_lossy(n),
                )
            })
            .collect();
        let mut out: Vec<[T; 2]> = upper.iter().map(|p| [p[0], -p[1]]).collect();
        let meet = upper[n];
        let tip = match self.side {
            Side::Outer => T::one() + self.t,
            Side::Inner => T::one() - self.t,
        };
        if (meet[0] - tip).abs() > T::epsilon() {
            out.push([tip, T::zero()]);
        }
        out.extend(upper.into_iter().rev());
        out
    }
}

/// Point at arc length `s` along the arc leaving `(cos θ, sin θ)` tangent to
/// `∂B` in the clockwise direction, turning clockwise with curvature `k`.
fn arc_point<T: Real>(theta: T, k: T, s: T) -> [T; 2] {
    let phi = theta - T::FRAC_PI_2() - k * s * T::half();
    let chord = s * sinc(k * s * T::half());
    [
        theta.cos() + chord * phi.cos(),
        theta.sin() + chord * phi.sin(),
    ]
}

/// `∫_0^L (x y′ − y x′) ds` along that arc.
fn arc_moment<T: Real>(theta: T, k: T, len: T) -> T {
    let gl = GaussLegendre::<T>::new(32);
    gl.integrate(T::zero(), len, |s| {
        let p = arc_point(theta, k, s);
        let d = theta - T::FRAC_PI_2() - k * s;
        p[0] * d.sin() - p[1] * d.cos()
    })
}

/// Length of the minor arc of curvature `k` over a chord of length `chord`.
fn minor_arc<T: Real>(k: T, chord: T) -> T {
    let z = (k.abs() * chord * T::half()).min(T::one());
    if z < c(1e-8) {
        chord
    } else {
        chord * z.asin() / z
    }
}

/// Free-arc geometry for one contact angle.
struct Member<T> {
    curvature: T,
    arc_length: T,
    t_eff: T,
    beta: T,
    corner: bool,
}

fn tangency_angle<T: Real>(side: Side, t: T) -> T {
    match side {
        Side::Outer => T::two() * (T::one() + t).atan() - T::FRAC_PI_2(),
        Side::Inner => T::FRAC_PI_2() - T::two() * (T::one() - t).atan(),
    }
}

fn member<T: Real>(side: Side, t: T, theta: T) -> Member<T> {
    let (s, co) = theta.sin_cos();
    let (curvature, arc_length, t_eff, corner) = if theta >= tangency_angle(side, t) {
        let y = match side {
            Side::Outer => T::one() + t,
            Side::Inner => T::one() - t,
        };
        let chord2 = y * y + T::one() - T::two() * y * co;
        let k = T::two() * (T::one() - y * co) / chord2;
        (k, minor_arc(k, chord2.sqrt()), t, true)
    } else {
        match side {
            Side::Outer => {
                let k = -(T::one() - s) / s;
                let len = (T::FRAC_PI_2() - theta) * s / (T::one() - s);
                (k, len, co / (T::one() - s) - T::one(), false)
            }
            Side::Inner => {
                let k = (T::one() + s) / s;
                let len = (T::FRAC_PI_2() + theta) * s / (T::one() + s);
                (k, len, T::one() - co / (T::one() + s), false)
            }
        }
    };
    let moment = arc_moment(theta, curvature, arc_length);
    let beta = match side {
        Side::Outer => -theta - moment,
        Side::Inner => theta + moment,
    };
    Member {
        curvature,
        arc_length,
        t_eff,
        beta,
        corner,
    }
}

fn solve<T: Real>(side: Side, t: T, beta: T) -> Result<MinCurveResult<T>> {
    if !(t > T::zero()) || !(beta >= T::zero()) || !t.is_finite() || !beta.is_finite() {
        return Err(Error::Argument(format!(
            "need t > 0 and beta >= 0, got t = {t}, beta = {beta}"
        )));
    }
    let pi = T::PI();
    let margin = c::<T>(1e-9);
    let feasible = match side {
        Side::Outer => pi + beta <= pi * (T::one() + t).powi(2) + margin,
        Side::Inner => t <= T::one() && pi - beta >= pi * (T::one() - t).powi(2) - margin,
    };
    if !feasible {
        return Err(Error::Infeasible(format!(
            "no {side:?} curve with offset {t} and area {beta}"
        )));
    }
    if beta == T::zero() {
        let case = if side == Side::Outer {
            CurveCase::TangentialSpike
        } else {
            CurveCase::InnerTangentialSpike
        };
        return Ok(MinCurveResult {
            side,
            t,
            beta,
            length: T::TAU() + T::two() * t,
            contact_angle: T::zero(),
            t_eff: T::zero(),
            case,
            curvature: T::zero(),
            arc_length: T::zero(),
        });
    }
    let touching = member(side, t, pi).beta;
    if beta >= touching {
        let radius = match side {
            Side::Outer => (T::one() + beta / pi).sqrt(),
            Side::Inner => (T::one() - beta / pi).max(T::zero()).sqrt(),
        };
        let case = if side == Side::Outer {
            CurveCase::DetachedCircle
        } else {
            CurveCase::InnerDetachedCircle
        };
        return Ok(MinCurveResult {
            side,
            t,
            beta,
            length: T::TAU() * radius,
            contact_angle: pi,
            t_eff: t,
            case,
            curvature: radius.recip(),
            arc_length: pi * radius,
        });
    }
    let (mut lo, mut hi) = (T::zero(), pi);
    bisect_increasing(|th| member(side, t, th).beta, beta, &mut lo, &mut hi);
    let theta = (lo + hi) * T::half();
    let m = member(side, t, theta);
    let case = match (side, m.corner) {
        (Side::Outer, true) if m.curvature.abs() <= c(1e-9) => CurveCase::StraightCorner,
        (Side::Outer, true) if m.curvature > T::zero() => CurveCase::ConvexCorner,
        (Side::Outer, true) => CurveCase::ConcaveCorner,
        (Side::Outer, false) => CurveCase::TangentialSpike,
        (Side::Inner, true) => CurveCase::InnerCorner,
        (Side::Inner, false) => CurveCase::InnerTangentialSpike,
    };
    Ok(MinCurveResult {
        side,
        t,
        beta,
        length: T::TAU() - T::two() * theta + T::two() * m.arc_length + T::two() * (t - m.t_eff),
        contact_angle: theta,
        t_eff: m.t_eff,
        case,
        curvature: m.curvature,
        arc_length: m.arc_length,
    })
}

/// Shortest curve enclosing `B` plus area `beta` whose farthest point lies
/// at distance `t` from `∂B`.
pub fn min_curve_outer<T: Real>(t: T, beta: T) -> Result<MinCurveResult<T>> {
    solve(Side::Outer, t, beta)
}

/// Shortest curve enclosing `B` minus area `beta` whose nearest point to
/// the center lies at distance `t` inside `∂B`.
pub fn min_curve_inner<T: Real>(t: T, beta: T) -> Result<MinCurveResult<T>> {
    solve(Side::Inner, t, beta)
}

/// Single arcs through `(cos θ±, ± sin θ±)` cutting area `nu` off (inner)
/// or adding it to (outer) the unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaArcs<T> {
    /// Largest distance of the outer arc from `∂B`.
    pub d_plus: T,
    /// Largest distance of the inner arc from `∂B`.
    pub d_minus: T,
    /// `nu / (d_plus · θ+)`.
    pub ratio_plus: T,
    /// `nu / (d_minus · θ−)`.
    pub ratio_minus: T,
}

/// Signed area between `∂B` and the arc through the contact points with
/// apex `(1 + δ, 0)`, for contact angles in `(0, π)`.
fn apex_area<T: Real>(theta: T, delta: T) -> T {
    let (s, co) = theta.sin_cos();
    let seg = |sag: T| {
        let th = T::two() * (sag / s).atan();
        let sc = sinc(th);
        c::<T>(4.0) * s * s * th * crate::real::x_minus_sin_over_cube(T::two() * th) / (sc * sc)
    };
    seg(T::one() + delta - co) - seg(T::one() - co)
}

/// Builds the outer and inner comparison arcs for the contact angles of the
/// two minimal curves and the area `nu`.
pub fn gamma_arcs<T: Real>(theta_plus: T, theta_minus: T, nu: T) -> Result<GammaArcs<T>> {
    let pi = T::PI();
    for th in [theta_plus, theta_minus] {
        if !(th > T::zero() && th < pi) {
            return Err(Error::Domain(format!("contact angle {th} outside (0, pi)")));
        }
    }
    if !(nu > T::zero() && nu < pi) {
        return Err(Error::Range(format!("area {nu} outside (0, pi)")));
    }
    let mut hi = T::one();
    while apex_area(theta_plus, hi) < nu {
        hi = hi * T::two();
        if hi > c(1e12) {
            return Err(Error::Range(format!(
                "area {nu} not attained by an outer arc"
            )));
        }
    }
    let mut lo = T::zero();
    bisect_increasing(|d| apex_area(theta_plus, d), nu, &mut lo, &mut hi);
    let d_plus = (lo + hi) * T::half();
    // Apex inside B: δ ∈ (−2, 0); the area removed tends to π at δ = −2.
    let (mut lo, mut hi) = (-T::two(), T::zero());
    bisect_increasing(|d| apex_area(theta_minus, d), -nu, &mut lo, &mut hi);
    let d_minus = -(lo + hi) * T::half();
    Ok(GammaArcs {
        d_plus,
        d_minus,
        ratio_plus: nu / (d_plus * theta_plus),
        ratio_minus: nu / (d_minus * theta_minus),
    })
}

/// `(P(E) − P(B)) / (ν (δ⁺ + δ⁻))` for a shape of area `π`, measured
/// against its best-fitting unit disk; `None` when `ν` vanishes.
pub fn deficit_ratio<T: Real>(s: &StarShape<T>) -> Result<Option<T>> {
    let report = fraenkel_center(s)?;
    let spread = report.delta_plus + report.delta_minus;
    if report.nu <= c(1e-12) || spread <= T::zero() {
        return Ok(None);
    }
    Ok(Some((s.perimeter() - T::TAU()) / (report.nu * spread)))
}
