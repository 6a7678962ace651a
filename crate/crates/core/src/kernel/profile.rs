//! Planar radial primitives of a kernel.
//!
//! `gint(r) = ∫_0^r g(ρ) ρ dρ` is the mass function of `g` on a disk (up to
//! the factor 2π) and `u` solves `u' = gint / r`, `u(0) = 0`, so that
//! `Δ u(|x|) = g(|x|)` in the plane. Closed forms are used where they exist;
//! other kernels go through a log-spaced table with cubic Hermite lookup.

use crate::error::{Error, Result};
use crate::quad::gl_f64;
use crate::real::{c, Real};

use super::{KernelFamily, KernelSpec};

const R_MIN: f64 = 1e-6;
const R_MAX: f64 = 1e3;
const CELLS_PER_DECADE: usize = 512;

#[derive(Clone, Debug)]
enum Kind<T> {
    Power { alpha: T },
    Constant,
    Indicator { radius: T },
    Table(LogTable<T>),
}

/// Prepared planar primitives `g`, `gint`, `u` of an admissible kernel.
#[derive(Clone, Debug)]
pub struct RadialProfile<T> {
    kernel: KernelSpec<T>,
    kind: Kind<T>,
    small_c: T,
    small_p: T,
}

impl<T: Real> RadialProfile<T> {
    /// Errors if the kernel is not admissible in the plane.
    pub fn new(kernel: &KernelSpec<T>) -> Result<Self> {
        kernel.validate()?;
        let (small_c, small_p) = kernel.small_r_asymptotics()?;
        if small_p <= -T::two() {
            return Err(Error::Precondition(format!(
                "kernel {kernel} is not admissible in the plane (g ~ r^{small_p} at 0)"
            )));
        }
        let kind = match &kernel.family {
            KernelFamily::Power { alpha } => Kind::Power { alpha: *alpha },
            KernelFamily::Constant => Kind::Constant,
            KernelFamily::Indicator { radius } => Kind::Indicator { radius: *radius },
            KernelFamily::GaussPower { kappa, alpha } if *kappa == T::zero() => {
                Kind::Power { alpha: -*alpha }
            }
            _ => Kind::Table(LogTable::build(kernel, small_c, small_p)),
        };
        Ok(Self {
            kernel: kernel.clone(),
            kind,
            small_c,
            small_p,
        })
    }

    pub fn kernel(&self) -> &KernelSpec<T> {
        &self.kernel
    }

    #[inline]
    pub fn g(&self, r: T) -> T {
        self.kernel.g(r)
    }

    /// `∫_0^r g(ρ) ρ dρ`.
    #[inline]
    pub fn gint(&self, r: T) -> T {
        match &self.kind {
            Kind::Power { alpha } => {
                let p = *alpha + T::two();
                r.powf(p) / p
            }
            Kind::Constant => r * r * T::half(),
            Kind::Indicator { radius } => {
                let m = r.min(*radius);
                m * m * T::half()
            }
            Kind::Table(t) => t.gint(r),
        }
    }

    /// Planar potential with `u' = gint / r` and `u(0) = 0`.
    #[inline]
    pub fn u(&self, r: T) -> T {
        match &self.kind {
            Kind::Power { alpha } => {
                let p = *alpha + T::two();
                r.powf(p) / (p * p)
            }
            Kind::Constant => r * r * c(0.25),
            Kind::Indicator { radius } => {
                let rr = *radius;
                if r <= rr {
                    r * r * c(0.25)
                } else {
                    rr * rr * (c::<T>(0.25) + T::half() * (r / rr).ln())
                }
            }
            Kind::Table(t) => t.u(r),
        }
    }

    /// Leading singular term of `u` at the origin, `u(r) ≈ coef · r^power`.
    pub fn u_singular_part(&self) -> (T, T) {
        let q = self.small_p + T::two();
        (self.small_c / (q * q), q)
    }

    /// Radii where `g` is discontinuous.
    pub fn breakpoints(&self) -> Vec<T> {
        match &self.kind {
            Kind::Indicator { radius } => vec![*radius],
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
struct LogTable<T> {
    u0: T,
    du: T,
    gint: Vec<T>,
    dgint: Vec<T>,
    pot: Vec<T>,
    small_c: T,
    small_p: T,
    r_min: T,
    r_max: T,
    g_tail: T,
}

impl<T: Real> LogTable<T> {
    fn build(kernel: &KernelSpec<T>, small_c: T, small_p: T) -> Self {
        let r_min: T = c(R_MIN);
        let r_max: T = c(R_MAX);
        let decades = (R_MAX / R_MIN).log10().round() as usize;
        let cells = decades * CELLS_PER_DECADE;
        let u0 = r_min.ln();
        let du = (r_max.ln() - u0) / T::from_usize_lossy(cells);
        let q = small_p + T::two();
        let node = |i: usize| (u0 + du * T::from_usize_lossy(i)).exp();
        let mut gint = Vec::with_capacity(cells + 1);
        let mut dgint = Vec::with_capacity(cells + 1);
        let mut pot = Vec::with_capacity(cells + 1);
        gint.push(small_c * r_min.powf(q) / q);
        pot.push(small_c * r_min.powf(q) / (q * q));
        dgint.push(kernel.g(r_min) * r_min * r_min);
        let rule = gl_f64(8);
        for i in 0..cells {
            let ua = u0 + du * T::from_usize_lossy(i);
            let mid = ua + du * T::half();
            let cell: T = rule.iter().fold(T::zero(), |s, &(x, w)| {
                let r = (mid + du * T::half() * c::<T>(x)).exp();
                s + c::<T>(w) * kernel.g(r) * r * r
            }) * du
                * T::half();
            let r1 = node(i + 1);
            let g1 = gint[i] + cell;
            let d1 = kernel.g(r1) * r1 * r1;
            let step = du * (gint[i] + g1) * T::half() + du * du * (dgint[i] - d1) / c(12.0);
            gint.push(g1);
            dgint.push(d1);
            pot.push(pot[i] + step);
        }
        Self {
            u0,
            du,
            gint,
            dgint,
            pot,
            small_c,
            small_p,
            r_min,
            r_max,
            g_tail: kernel.g(r_max),
        }
    }

    #[inline]
    fn locate(&self, r: T) -> (usize, T) {
        let x = (r.ln() - self.u0) / self.du;
        let last = self.gint.len() - 2;
        let i = x.floor().to_usize().unwrap_or(0).min(last);
        (i, x - T::from_usize_lossy(i))
    }

    #[inline]
    fn hermite(t: T, y0: T, d0: T, y1: T, d1: T) -> T {
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = T::two() * t3 - c::<T>(3.0) * t2 + T::one();
        let h10 = t3 - T::two() * t2 + t;
        let h01 = c::<T>(-2.0) * t3 + c::<T>(3.0) * t2;
        let h11 = t3 - t2;
        h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1
    }

    fn gint(&self, r: T) -> T {
        if r <= self.r_min {
            let q = self.small_p + T::two();
            return self.small_c * r.powf(q) / q;
        }
        let n = self.gint.len() - 1;
        if r >= self.r_max {
            return self.gint[n] + self.g_tail * (r * r - self.r_max * self.r_max) * T::half();
        }
        let (i, t) = self.locate(r);
        Self::hermite(
            t,
            self.gint[i],
            self.dgint[i] * self.du,
            self.gint[i + 1],
            self.dgint[i + 1] * self.du,
        )
    }

    fn u(&self, r: T) -> T {
        if r <= self.r_min {
            let q = self.small_p + T::two();
            return self.small_c * r.powf(q) / (q * q);
        }
        let n = self.pot.len() - 1;
        if r >= self.r_max {
            let l = (r / self.r_max).ln();
            let rm2 = self.r_max * self.r_max;
            return self.pot[n]
                + self.gint[n] * l
                + self.g_tail * ((r * r - rm2) * c(0.25) - rm2 * T::half() * l);
        }
        let (i, t) = self.locate(r);
        Self::hermite(
            t,
            self.pot[i],
            self.gint[i] * self.du,
            self.pot[i + 1],
            self.gint[i + 1] * self.du,
        )
    }
}
