//! Interaction energies of star shapes as boundary double integrals.
//!
//! With `u` the planar potential of the kernel (`Δ u(|x|) = g(|x|)`), two
//! applications of the divergence theorem give
//! `ℜ(F, G) = −∮_{∂F} ∮_{∂G} u(|x − y|) dx·dy`.
//! Both boundaries are parametrized by polar angle and the double integral is
//! taken with the periodic trapezoidal rule. On the diagonal of a self
//! interaction the integrand behaves like `|s − t|^q`, which the rule
//! resolves only to `O(h^(q+1))`; the leading error term is removed with the
//! zeta-function correction for algebraic singularities.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::RadialProfile;
use crate::quad::{pairwise_sum, par_chunked_sum};
use crate::real::{zeta_negative, Real};
use crate::shapes::StarShape;

/// Sampled boundary: points and derivatives with respect to the angle.
struct Boundary<T> {
    points: Vec<[T; 2]>,
    tangents: Vec<[T; 2]>,
}

impl<T: Real> Boundary<T> {
    fn sample(s: &StarShape<T>, n: usize) -> Self {
        let h = T::TAU() / T::from_usize_lossy(n);
        let (points, tangents) = (0..n)
            .map(|i| s.point_and_tangent(h * T::from_usize_lossy(i)))
            .unzip();
        Self { points, tangents }
    }
}

/// Diagonal correction weight `2ζ(−q)·coef`, with `u(r) ≈ coef·r^q`.
fn diagonal_weight<T: Real>(p: &RadialProfile<T>) -> (T, T) {
    let (coef, q) = p.u_singular_part();
    let qf = q.to_f64_lossy();
    // ζ vanishes at negative even integers, where u is smooth anyway.
    let z = if (qf - qf.round()).abs() < 1e-12 && (qf.round() as i64) % 2 == 0 {
        0.0
    } else {
        zeta_negative(qf)
    };
    (T::lit(2.0 * z) * coef, q)
}

/// `ℜ(s)` on a fixed grid of `n` boundary nodes.
pub fn self_interaction_fixed<T: Real>(p: &RadialProfile<T>, s: &StarShape<T>, n: usize) -> T {
    let b = Boundary::sample(s, n);
    let h = T::TAU() / T::from_usize_lossy(n);
    let off_diagonal = par_chunked_sum(n, 64, |rows| {
        let mut acc = T::zero();
        for i in rows {
            let (xi, ti) = (b.points[i], b.tangents[i]);
            let mut row = T::zero();
            for j in i + 1..n {
                let (xj, tj) = (b.points[j], b.tangents[j]);
                let r = (xi[0] - xj[0]).hypot(xi[1] - xj[1]);
                row += p.u(r) * (ti[0] * tj[0] + ti[1] * tj[1]);
            }
            acc += row;
        }
        acc
    });
    let (w, q) = diagonal_weight(p);
    let diagonal = if w == T::zero() {
        T::zero()
    } else {
        let hq = h.powf(q + T::one());
        b.tangents
            .iter()
            .map(|t| t[0].hypot(t[1]).powf(q + T::two()))
            .sum::<T>()
            * w
            * hq
    };
    -T::two() * h * h * off_diagonal + h * diagonal
}

/// `ℜ(a, b)` for distinct shapes on fixed grids.
pub fn cross_interaction_fixed<T: Real>(
    p: &RadialProfile<T>,
    a: &StarShape<T>,
    b: &StarShape<T>,
    n: usize,
) -> T {
    cross_with_magnitude(p, a, b, n).0
}

/// Value and the sum of absolute terms, which sets the rounding floor.
fn cross_with_magnitude<T: Real>(
    p: &RadialProfile<T>,
    a: &StarShape<T>,
    b: &StarShape<T>,
    n: usize,
) -> (T, T) {
    let ba = Boundary::sample(a, n);
    let bb = Boundary::sample(b, n);
    let h = T::TAU() / T::from_usize_lossy(n);
    let rows: Vec<(T, T)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (xi, ti) = (ba.points[i], ba.tangents[i]);
            let (mut row, mut mag) = (T::zero(), T::zero());
            for j in 0..n {
                let (xj, tj) = (bb.points[j], bb.tangents[j]);
                let r = (xi[0] - xj[0]).hypot(xi[1] - xj[1]);
                let term = p.u(r) * (ti[0] * tj[0] + ti[1] * tj[1]);
                row += term;
                mag += term.abs();
            }
            (row, mag)
        })
        .collect();
    let sum: Vec<T> = rows.iter().map(|r| r.0).collect();
    let mag: Vec<T> = rows.iter().map(|r| r.1).collect();
    (-h * h * pairwise_sum(&sum), h * h * pairwise_sum(&mag))
}

/// Node doubling schedule for the adaptive evaluations.
#[derive(Clone, Copy, Debug)]
pub struct Refinement {
    pub rel_tol: f64,
    pub min_nodes: usize,
    pub max_nodes: usize,
}

/// Doubles `n` until successive values of `f(n) = (value, magnitude)` agree
/// to the relative tolerance or to rounding level of the magnitude.
fn refine<T: Real, F: Fn(usize) -> (T, T)>(what: &str, cfg: Refinement, f: F) -> Result<T> {
    let mut n = cfg.min_nodes.max(8);
    let mut prev = f(n).0;
    loop {
        let next_n = n * 2;
        if next_n > cfg.max_nodes {
            let err = prev.to_f64_lossy().abs();
            return Err(Error::ToleranceNotMet {
                context: format!("{what} did not converge within {} nodes", cfg.max_nodes),
                estimate: prev.to_f64_lossy(),
                error: err.max(f64::MIN_POSITIVE),
            });
        }
        let (cur, mag) = f(next_n);
        let diff = (cur - prev).abs();
        let floor = T::epsilon() * T::lit(64.0) * (cur.abs() + mag);
        if diff <= T::lit(cfg.rel_tol) * cur.abs() || diff <= floor {
            return Ok(cur);
        }
        if next_n * 2 > cfg.max_nodes {
            return Err(Error::ToleranceNotMet {
                context: format!("{what} did not converge within {} nodes", cfg.max_nodes),
                estimate: cur.to_f64_lossy(),
                error: diff.to_f64_lossy(),
            });
        }
        prev = cur;
        n = next_n;
    }
}

/// `ℜ(s)` by node doubling until successive values agree.
pub fn self_interaction<T: Real>(
    p: &RadialProfile<T>,
    s: &StarShape<T>,
    cfg: Refinement,
) -> Result<T> {
    if s.is_disk() {
        // Rotational symmetry: one row of the double sum suffices.
        return refine("disk self interaction", cfg, |n| {
            (disk_self_fixed(p, s.r0(), n), T::zero())
        });
    }
    refine("self interaction", cfg, |n| {
        (self_interaction_fixed(p, s, n), T::zero())
    })
}

/// `ℜ(a, b)` by node doubling.
pub fn cross_interaction<T: Real>(
    p: &RadialProfile<T>,
    a: &StarShape<T>,
    b: &StarShape<T>,
    cfg: Refinement,
) -> Result<T> {
    refine("cross interaction", cfg, |n| {
        cross_with_magnitude(p, a, b, n)
    })
}

/// Self interaction of the disk of radius `r`, using that every row of the
/// boundary sum is the same.
fn disk_self_fixed<T: Real>(p: &RadialProfile<T>, r: T, n: usize) -> T {
    let h = T::TAU() / T::from_usize_lossy(n);
    let mut row = T::zero();
    for j in 1..n {
        let phi = h * T::from_usize_lossy(j);
        let dist = T::two() * r * (phi * T::half()).sin().abs();
        row += p.u(dist) * r * r * phi.cos();
    }
    let (w, q) = diagonal_weight(p);
    let diag = w * h.powf(q + T::one()) * r.powf(q + T::two());
    T::TAU() * (-h * row + diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use std::f64::consts::PI;

    fn profile(k: KernelSpec<f64>) -> RadialProfile<f64> {
        RadialProfile::new(&k).unwrap()
    }

    const CFG: Refinement = Refinement {
        rel_tol: 1e-10,
        min_nodes: 64,
        max_nodes: 1 << 14,
    };

    /// `ℜ(B_R) = ∫_0^{2R} g(r) A_R(r) 2πr dr` with `A_R` the area of the
    /// intersection of two radius-R disks at distance r.
    fn radial_disk(k: &KernelSpec<f64>, radius: f64) -> f64 {
        let overlap = |r: f64| {
            2.0 * radius * radius * (r / (2.0 * radius)).acos()
                - 0.5 * r * (4.0 * radius * radius - r * r).max(0.0).sqrt()
        };
        crate::quad::integrate(
            |r: f64| k.eval(r).unwrap() * overlap(r) * 2.0 * PI * r,
            0.0,
            2.0 * radius,
            crate::quad::Tolerance::relative(1e-13),
        )
        .value
    }

    #[test]
    fn constant_kernel_gives_squared_area() {
        let p = profile(KernelSpec::constant());
        let b = StarShape::unit_disk();
        assert!((self_interaction(&p, &b, CFG).unwrap() - PI * PI).abs() < 1e-10);
        let s = StarShape::new([0.2, 0.1], 0.9, vec![(2, 0.1, 0.05), (3, 0.0, 0.07)]).unwrap();
        let v = self_interaction(&p, &s, CFG).unwrap();
        assert!((v - s.area().powi(2)).abs() < 1e-10);
        let t = StarShape::disk([0.5, 0.0], 0.7).unwrap();
        let x = cross_interaction(&p, &s, &t, CFG).unwrap();
        assert!((x - s.area() * t.area()).abs() < 1e-10);
    }

    #[test]
    fn disk_matches_radial_reduction() {
        for k in [
            KernelSpec::power(-0.5),
            KernelSpec::power(-1.5),
            KernelSpec::power(0.5),
            KernelSpec::indicator(0.6).unwrap(),
            KernelSpec::gauss_power(1.0, 0.5).unwrap(),
        ] {
            let p = profile(k.clone());
            for radius in [1.0, 0.3] {
                let expected = radial_disk(&k, radius);
                let got =
                    self_interaction(&p, &StarShape::disk([0.0; 2], radius).unwrap(), CFG).unwrap();
                assert!(
                    (got - expected).abs() < 1e-8 * expected,
                    "{k} R={radius}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn general_path_agrees_with_disk_path() {
        let p = profile(KernelSpec::power(-0.5));
        let b = StarShape::unit_disk();
        let general = self_interaction_fixed(&p, &b, 1024);
        let disk = disk_self_fixed(&p, 1.0, 1024);
        assert!((general - disk).abs() < 1e-11 * disk);
    }

    #[test]
    fn cross_term_of_far_apart_disks() {
        // For distant disks ℜ(A, B) ≈ |A||B| g(d).
        let p = profile(KernelSpec::power(-0.5));
        let a = StarShape::disk([0.0, 0.0], 0.1).unwrap();
        let b = StarShape::disk([10.0, 0.0], 0.1).unwrap();
        let x = cross_interaction(&p, &a, &b, CFG).unwrap();
        let approx = (PI * 0.01).powi(2) * 10f64.powf(-0.5);
        assert!((x / approx - 1.0).abs() < 1e-4);
    }

    #[test]
    fn symmetric_in_arguments() {
        let p = profile(KernelSpec::gauss_power(0.5, 0.5).unwrap());
        let a = StarShape::new([0.0, 0.0], 1.0, vec![(2, 0.1, 0.0)]).unwrap();
        let b = StarShape::new([0.5, 0.3], 0.8, vec![(3, 0.0, 0.1)]).unwrap();
        let ab = cross_interaction_fixed(&p, &a, &b, 512);
        let ba = cross_interaction_fixed(&p, &b, &a, 512);
        assert!((ab - ba).abs() < 1e-12 * ab.abs());
    }
}
