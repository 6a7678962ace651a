//! Quadrature and summation primitives.
//!
//! Everything here is generic over [`Real`]; the numeric crates on crates.io
//! that provide these rules are `f64`-only.

use std::ops::Range;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::{c, Real};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Stopping rule for adaptive quadrature.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance<T> {
    pub rel: T,
    pub abs: T,
    pub max_intervals: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self {
            rel: c(rel),
            abs: c(abs),
            max_intervals: 4000,
        }
    }

    pub fn relative(rel: f64) -> Self {
        Self::new(rel, 0.0)
    }
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Quad<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Real> Quad<T> {
    /// Turn a non-converged result into [`Error::ToleranceNotMet`].
    pub fn require(self, context: &str) -> Result<T> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::ToleranceNotMet {
                context: context.to_string(),
                estimate: self.value.to_f64_lossy(),
                error: self.error.to_f64_lossy(),
            })
        }
    }
}

fn kronrod21<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let center = (a + b) * T::half();
    let half = (b - a) * T::half();
    let fc = f(center);
    let mut kron = fc * c::<T>(WGK[10]);
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = half * c::<T>(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kron += c::<T>(WGK[j]) * s;
        if j % 2 == 1 {
            gauss += c::<T>(WG[j / 2]) * s;
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).abs())
}

/// Globally adaptive Gauss-Kronrod (10/21) integration of `f` over `[a, b]`.
///
/// The integrand is never evaluated at the endpoints, so integrable endpoint
/// singularities are fine. The returned [`Quad`] is flagged non-converged
/// instead of failing so that callers can keep a best estimate.
pub fn integrate<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: Tolerance<T>) -> Quad<T> {
    if a == b {
        return Quad {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
            converged: true,
        };
    }
    let (v, e) = kronrod21(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut evaluations = 21;
    let mut total = v;
    let mut total_err = e;
    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target {
            break;
        }
        if pieces.len() >= tol.max_intervals {
            return Quad {
                value: total,
                error: total_err,
                evaluations,
                converged: false,
            };
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| {
                if p.3 > acc.1 {
                    (i, p.3)
                } else {
                    acc
                }
            });
        let (pa, pb, pv, pe) = pieces.swap_remove(worst);
        let mid = (pa + pb) * T::half();
        if mid <= pa || mid >= pb {
            // Interval exhausted at machine resolution; accept what we have.
            pieces.push((pa, pb, pv, T::zero()));
            total_err -= pe;
            continue;
        }
        let (lv, le) = kronrod21(&mut f, pa, mid);
        let (rv, re) = kronrod21(&mut f, mid, pb);
        evaluations += 42;
        pieces.push((pa, mid, lv, le));
        pieces.push((mid, pb, rv, re));
        total = pieces.iter().map(|p| p.2).fold(T::zero(), |s, x| s + x);
        total_err = pieces.iter().map(|p| p.3).fold(T::zero(), |s, x| s + x);
    }
    Quad {
        value: total,
        error: total_err,
        evaluations,
        converged: true,
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton iteration.
pub fn gauss_legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Fixed-order Gauss-Legendre rule.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<(T, T)>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        Self {
            nodes: gauss_legendre_nodes(n)
                .into_iter()
                .map(|(x, w)| (c(x), c(w)))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let mid = (a + b) * T::half();
        let half = (b - a) * T::half();
        self.nodes
            .iter()
            .map(move |&(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        self.mapped(a, b).fold(T::zero(), |s, (x, w)| s + w * f(x))
    }
}

/// Cached `f64` rule of the given order (orders up to 64).
pub(crate) fn gl_f64(n: usize) -> &'static [(f64, f64)] {
    static CACHE: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    let table = CACHE.get_or_init(|| {
        (0..=64)
            .map(|k| {
                if k == 0 {
                    Vec::new()
                } else {
                    gauss_legendre_nodes(k)
                }
            })
            .collect()
    });
    &table[n]
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        xs.iter().fold(T::zero(), |s, &x| s + x)
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Sum `f` over fixed chunks of `0..n` in parallel and reduce the partial
/// sums pairwise. The result does not depend on the thread count.
pub fn par_chunked_sum<T, F>(n: usize, chunk: usize, f: F) -> T
where
    T: Real,
    F: Fn(Range<usize>) -> T + Sync,
{
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    let partial: Vec<T> = (0..n_chunks)
        .into_par_iter()
        .map(|i| f(i * chunk..((i + 1) * chunk).min(n)))
        .collect();
    pairwise_sum(&partial)
}

/// Periodic trapezoidal rule over one period using `n` equispaced samples.
pub fn periodic_trapezoid<T: Real, F: FnMut(T) -> T>(n: usize, period: T, mut f: F) -> T {
    let h = period / T::from_usize_lossy(n);
    let samples: Vec<T> = (0..n).map(|i| f(h * T::from_usize_lossy(i))).collect();
    pairwise_sum(&samples) * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_polynomial_exact() {
        let q = integrate(
            |x: f64| x.powi(7) - 3.0 * x * x,
            -1.0,
            2.0,
            Tolerance::relative(1e-14),
        );
        let exact = (256.0 - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((q.value - exact).abs() < 1e-12);
        assert!(q.converged);
    }

    #[test]
    fn kronrod_endpoint_singularity() {
        let q = integrate(
            |x: f64| x.powf(-0.5),
            0.0,
            1.0,
            Tolerance::new(1e-12, 1e-14),
        );
        assert!(q.converged);
        assert!((q.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn kronrod_flags_nonconvergence() {
        let tol = Tolerance {
            rel: 1e-14,
            abs: 0.0,
            max_intervals: 3,
        };
        let q = integrate(|x: f64| x.powf(-0.9), 0.0, 1.0, tol);
        assert!(!q.converged);
        assert!(q.require("test").is_err());
    }

    #[test]
    fn legendre_rules() {
        for n in [1usize, 2, 5, 8, 16] {
            let rule = GaussLegendre::<f64>::new(n);
            let deg = 2 * n - 1;
            let val = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((val - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n = {n}");
            let wsum: f64 = rule.mapped(-1.0, 1.0).map(|p| p.1).sum();
            assert!((wsum - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn generic_over_f32() {
        let q = integrate(
            |x: f32| x.sin(),
            0.0f32,
            std::f32::consts::PI,
            Tolerance::relative(1e-5),
        );
        assert!((q.value - 2.0).abs() < 1e-5);
    }

    #[test]
    fn sums_are_deterministic() {
        let xs: Vec<f64> = (0..10_000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let a = pairwise_sum(&xs);
        let b = par_chunked_sum(xs.len(), 97, |r| pairwise_sum(&xs[r]));
        let c2 = par_chunked_sum(xs.len(), 97, |r| pairwise_sum(&xs[r]));
        assert_eq!(b, c2);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_spectral() {
        let v = periodic_trapezoid(32, 2.0 * std::f64::consts::PI, |t| (t.cos()).exp());
        // 2*pi*I0(1)
        assert!((v - 2.0 * std::f64::consts::PI * 1.266_065_877_752_008_4).abs() < 1e-13);
    }
}
