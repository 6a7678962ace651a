//! Exact cell-pair weights and raster interaction sums.
//!
//! For square cells of side `h` whose lattice indices differ by `d`,
//! `W(d) = ∫_{cell 0} ∫_{cell d} g(|x − y|) dx dy
//!       = h⁴ ∫_{[−1,1]²} g(h|d + v|) (1 − |v₁|)(1 − |v₂|) dv`.
//! The interaction of two rasters on a common lattice is then the exact sum
//! `Σ_d C(d) W(d)` over the pair-count correlation `C` of their masks.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::kernel::RadialProfile;
use crate::quad::{gl_f64, integrate, Tolerance};
use crate::real::{c, Real};
use crate::shapes::RasterSet;

/// Above this many cell pairs the pair counts go through an FFT correlation.
const DIRECT_PAIR_LIMIT: usize = 4_000_000;

fn tight<T: Real>(rel: f64) -> Tolerance<T> {
    let rel = rel.max(64.0 * T::epsilon().to_f64_lossy());
    Tolerance {
        rel: c(rel),
        abs: T::zero(),
        max_intervals: 400,
    }
}

/// `∫_0^R g(hρ) (a + bρ + cρ²) ρ dρ`, with a power substitution that
/// flattens the origin singularity.
fn radial_moment<T: Real>(p: &RadialProfile<T>, h: T, r_max: T, poly: [T; 3]) -> T {
    let (_, q) = p.u_singular_part();
    // g(hρ)ρ ~ ρ^(q-1); with ρ = R t^m the integrand behaves like t^(mq-1).
    let m = (T::two() / q).max(T::one());
    let body = |t: T| -> T {
        if t <= T::zero() {
            return T::zero();
        }
        let tm1 = t.powf(m - T::one());
        let rho = r_max * tm1 * t;
        let w = poly[0] + rho * (poly[1] + rho * poly[2]);
        p.g(h * rho) * w * rho * r_max * m * tm1
    };
    let mut cuts = vec![T::zero()];
    for b in p.breakpoints() {
        let rb = b / h;
        if rb > T::zero() && rb < r_max {
            cuts.push((rb / r_max).powf(T::one() / m));
        }
    }
    cuts.push(T::one());
    cuts.windows(2)
        .map(|w| integrate(body, w[0], w[1], tight(1e-12)).value)
        .sum()
}

/// Integral of `g(h|u|) (α₁ + β₁u₁)(α₂ + β₂u₂)` over `[0,1]²` in polar
/// coordinates about the singular corner `u = 0`.
fn corner_square<T: Real>(p: &RadialProfile<T>, h: T, l1: [T; 2], l2: [T; 2]) -> T {
    let quarter = T::FRAC_PI_4();
    let radial = |phi: T| -> T {
        let (s, co) = phi.sin_cos();
        let r_max = T::one() / co.max(s);
        let a = l1[0] * l2[0];
        let b = l1[0] * l2[1] * s + l1[1] * l2[0] * co;
        let cc = l1[1] * l2[1] * co * s;
        radial_moment(p, h, r_max, [a, b, cc])
    };
    let mut cuts = vec![T::zero(), quarter, T::FRAC_PI_2()];
    for b in p.breakpoints() {
        let rb = b / h;
        if rb > T::one() && rb < T::SQRT_2() {
            let phi = (T::one() / rb).acos();
            cuts.push(phi);
            cuts.push(T::FRAC_PI_2() - phi);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| integrate(radial, w[0], w[1], tight(1e-11)).value)
        .sum()
}

/// Same integrand over `[x0, x0+1] × [y0, y0+1]`, which avoids the origin.
fn regular_square<T: Real>(
    p: &RadialProfile<T>,
    h: T,
    x0: T,
    y0: T,
    weight: impl Fn(T, T) -> T,
) -> T {
    let nearest = |lo: T| {
        if lo > T::zero() {
            lo
        } else if lo + T::one() < T::zero() {
            -(lo + T::one())
        } else {
            T::zero()
        }
    };
    let dmin = nearest(x0).hypot(nearest(y0));
    let far = (x0.abs().max((x0 + T::one()).abs())).hypot(y0.abs().max((y0 + T::one()).abs()));
    let crossing: Vec<T> = p
        .breakpoints()
        .into_iter()
        .map(|b| b / h)
        .filter(|&rb| rb > dmin && rb < far)
        .collect();
    let f = |x: T, y: T| p.g(h * x.hypot(y)) * weight(x, y);
    if crossing.is_empty() {
        let n = if dmin <= c(3.0) {
            8
        } else if dmin <= c(8.0) {
            6
        } else {
            4
        };
        let rule = gl_f64(n);
        let half = T::half();
        let mut s = T::zero();
        for &(xi, wi) in rule {
            let x = x0 + half + half * c::<T>(xi);
            let mut row = T::zero();
            for &(yj, wj) in rule {
                let y = y0 + half + half * c::<T>(yj);
                row += c::<T>(wj) * f(x, y);
            }
            s += c::<T>(wi) * row;
        }
        return s * c(0.25);
    }
    // A discontinuity circle crosses the square: nested adaptive rule with
    // the inner range split where the circle meets each vertical line.
    let inner = |x: T| -> T {
        let mut cuts = vec![y0, y0 + T::one()];
        for &rb in &crossing {
            let d = rb * rb - x * x;
            if d > T::zero() {
                for y in [d.sqrt(), -d.sqrt()] {
                    if y > y0 && y < y0 + T::one() {
                        cuts.push(y);
                    }
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        cuts.windows(2)
            .map(|w| integrate(|y| f(x, y), w[0], w[1], tight(1e-12)).value)
            .sum()
    };
    let mut cuts = vec![x0, x0 + T::one()];
    for &rb in &crossing {
        for y in [y0, y0 + T::one()] {
            let d = rb * rb - y * y;
            if d > T::zero() {
                for x in [d.sqrt(), -d.sqrt()] {
                    if x > x0 && x < x0 + T::one() {
                        cuts.push(x);
                    }
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| integrate(inner, w[0], w[1], tight(1e-11)).value)
        .sum()
}

/// Mean of `g(|x|)` over the square of side `h` centered at the origin.
pub(crate) fn origin_cell_average<T: Real>(p: &RadialProfile<T>, h: T) -> T {
    corner_square(
        p,
        h * T::half(),
        [T::one(), T::zero()],
        [T::one(), T::zero()],
    )
}

/// `W(d)` for cells of side `h` at lattice offset `(dx, dy)`.
pub fn cell_weight<T: Real>(p: &RadialProfile<T>, h: T, dx: i64, dy: i64) -> T {
    let (ax, ay) = (dx.unsigned_abs() as i64, dy.unsigned_abs() as i64);
    let mut total = T::zero();
    for a in [-1i64, 0] {
        for b in [-1i64, 0] {
            let x0 = ax + a;
            let y0 = ay + b;
            // (1 - |u₁ - dx|) on [x0, x0+1] is u₁ - x0 when a = -1, x0 + 1 - u₁ when a = 0.
            let lin = |u: T, lo: i64, left: bool| {
                if left {
                    u - c::<T>(lo as f64)
                } else {
                    c::<T>(lo as f64) + T::one() - u
                }
            };
            if (x0 == 0 || x0 == -1) && (y0 == 0 || y0 == -1) {
                // Reflect onto [0,1]² and express the weight as α + β|u|.
                let affine = |lo: i64, left: bool| -> [T; 2] {
                    let s = if lo == 0 { T::one() } else { -T::one() };
                    let v0 = lin(T::zero(), lo, left);
                    let v1 = lin(s, lo, left);
                    [v0, v1 - v0]
                };
                let l1 = affine(x0, a == -1);
                let l2 = affine(y0, b == -1);
                total += corner_square(p, h, l1, l2);
            } else {
                let weight = |u1: T, u2: T| lin(u1, x0, a == -1) * lin(u2, y0, b == -1);
                total += regular_square(p, h, c(x0 as f64), c(y0 as f64), weight);
            }
        }
    }
    let h2 = h * h;
    total * h2 * h2
}

/// Table of `W(dx, dy)` for `0 ≤ dx, dy ≤ extent` at a fixed pitch.
#[derive(Clone, Debug)]
pub struct CellWeights<T> {
    pitch: T,
    extent: usize,
    table: Vec<T>,
}

impl<T: Real> CellWeights<T> {
    pub fn new(p: &RadialProfile<T>, pitch: T, extent: usize) -> Result<Self> {
        if !(pitch > T::zero()) {
            return Err(Error::Argument(format!(
                "pitch must be positive, got {pitch}"
            )));
        }
        let n = extent + 1;
        let upper: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|dx| {
                (dx..n)
                    .map(|dy| cell_weight(p, pitch, dx as i64, dy as i64))
                    .collect()
            })
            .collect();
        let mut table = vec![T::zero(); n * n];
        for (dx, row) in upper.into_iter().enumerate() {
            for (k, w) in row.into_iter().enumerate() {
                let dy = dx + k;
                table[dx * n + dy] = w;
                table[dy * n + dx] = w;
            }
        }
        Ok(Self {
            pitch,
            extent,
            table,
        })
    }

    /// Weights sized for any pair of cells inside the two rasters' union box.
    pub fn for_rasters(p: &RadialProfile<T>, a: &RasterSet<T>, b: &RasterSet<T>) -> Result<Self> {
        a.check_compatible(b)?;
        let (oa, ob) = (a.lattice_offset()?, b.lattice_offset()?);
        let x_lo = oa[0].min(ob[0]);
        let x_hi = (oa[0] + a.width() as i64).max(ob[0] + b.width() as i64);
        let y_lo = oa[1].min(ob[1]);
        let y_hi = (oa[1] + a.height() as i64).max(ob[1] + b.height() as i64);
        let extent = (x_hi - x_lo).max(y_hi - y_lo).max(1) as usize;
        Self::new(p, a.pitch(), extent)
    }

    pub fn pitch(&self) -> T {
        self.pitch
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    #[inline]
    pub fn get(&self, dx: i64, dy: i64) -> T {
        let (x, y) = (dx.unsigned_abs() as usize, dy.unsigned_abs() as usize);
        self.table[x * (self.extent + 1) + y]
    }

    fn check(&self, a: &RasterSet<T>) -> Result<()> {
        let rel = (a.pitch() - self.pitch).abs() / self.pitch;
        if rel > T::lit(1e-9) {
            return Err(Error::Argument(format!(
                "raster pitch {} differs from weight table pitch {}",
                a.pitch(),
                self.pitch
            )));
        }
        Ok(())
    }

    /// `Σ_d C(d) W(d)` for a pair-count table.
    fn contract(&self, counts: &PairCounts) -> Result<T> {
        let mut total = T::zero();
        for (k, &n) in counts.counts.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let dx = counts.dx0 + (k % counts.w) as i64;
            let dy = counts.dy0 + (k / counts.w) as i64;
            if dx.unsigned_abs() as usize > self.extent || dy.unsigned_abs() as usize > self.extent
            {
                return Err(Error::Argument(format!(
                    "cell offset ({dx}, {dy}) beyond weight table extent {}",
                    self.extent
                )));
            }
            total += T::from_u64(n).expect("count") * self.get(dx, dy);
        }
        Ok(total)
    }

    /// `ℜ(a, b)`.
    pub fn interaction(&self, a: &RasterSet<T>, b: &RasterSet<T>) -> Result<T> {
        self.check(a)?;
        self.check(b)?;
        self.contract(&pair_counts(a, b)?)
    }

    /// `ℜ(a) + ℜ(b) − 2ℜ(a, b)`, the form of `χ_a − χ_b`, computed from
    /// integer pair counts so that it vanishes exactly when `a = b`.
    pub fn difference_form(&self, a: &RasterSet<T>, b: &RasterSet<T>) -> Result<T> {
        self.check(a)?;
        self.check(b)?;
        let aa = pair_counts(a, a)?;
        let bb = pair_counts(b, b)?;
        let ab = pair_counts(a, b)?;
        // Combine on a common offset window.
        let dx0 = aa.dx0.min(bb.dx0).min(ab.dx0).min(-ab.dx1());
        let dy0 = aa.dy0.min(bb.dy0).min(ab.dy0).min(-ab.dy1());
        let dx1 = aa.dx1().max(bb.dx1()).max(ab.dx1()).max(-ab.dx0);
        let dy1 = aa.dy1().max(bb.dy1()).max(ab.dy1()).max(-ab.dy0);
        let w = (dx1 - dx0 + 1) as usize;
        let h = (dy1 - dy0 + 1) as usize;
        let mut net = vec![0i64; w * h];
        let mut add = |pc: &PairCounts, sign: i64, flip: bool| {
            for (k, &n) in pc.counts.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                let mut dx = pc.dx0 + (k % pc.w) as i64;
                let mut dy = pc.dy0 + (k / pc.w) as i64;
                if flip {
                    dx = -dx;
                    dy = -dy;
                }
                net[((dy - dy0) as usize) * w + (dx - dx0) as usize] += sign * n as i64;
            }
        };
        add(&aa, 1, false);
        add(&bb, 1, false);
        add(&ab, -1, false);
        add(&ab, -1, true);
        let mut total = T::zero();
        for (k, &n) in net.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let dx = dx0 + (k % w) as i64;
            let dy = dy0 + (k / w) as i64;
            if dx.unsigned_abs() as usize > self.extent || dy.unsigned_abs() as usize > self.extent
            {
                return Err(Error::Argument(format!(
                    "cell offset ({dx}, {dy}) beyond weight table extent {}",
                    self.extent
                )));
            }
            total += T::from_i64(n).expect("count") * self.get(dx, dy);
        }
        Ok(total)
    }
}

/// Number of cell pairs `(i ∈ a, j ∈ b)` at each lattice offset `j − i`.
struct PairCounts {
    dx0: i64,
    dy0: i64,
    w: usize,
    h: usize,
    counts: Vec<u64>,
}

impl PairCounts {
    fn dx1(&self) -> i64 {
        self.dx0 + self.w as i64 - 1
    }

    fn dy1(&self) -> i64 {
        self.dy0 + self.h as i64 - 1
    }
}

fn pair_counts<T: Real>(a: &RasterSet<T>, b: &RasterSet<T>) -> Result<PairCounts> {
    a.check_compatible(b)?;
    let (oa, ob) = (a.lattice_offset()?, b.lattice_offset()?);
    let dx0 = ob[0] - oa[0] - a.width() as i64 + 1;
    let dy0 = ob[1] - oa[1] - a.height() as i64 + 1;
    let w = (a.width() + b.width()).saturating_sub(1).max(1);
    let h = (a.height() + b.height()).saturating_sub(1).max(1);
    let (na, nb) = (a.count(), b.count());
    let counts = if na == 0 || nb == 0 {
        vec![0; w * h]
    } else if na.saturating_mul(nb) <= DIRECT_PAIR_LIMIT {
        let mut counts = vec![0u64; w * h];
        let cb = b.occupied();
        for (i, j) in a.occupied() {
            for &(k, l) in &cb {
                // offset = (ob + (k,l)) - (oa + (i,j)) - (dx0, dy0)
                let x = k + a.width() - 1 - i;
                let y = l + a.height() - 1 - j;
                counts[y * w + x] += 1;
            }
        }
        counts
    } else {
        fft_counts(a, b, w, h)
    };
    Ok(PairCounts {
        dx0,
        dy0,
        w,
        h,
        counts,
    })
}

/// Correlation of the masks by FFT, rounded back to integers.
fn fft_counts<T: Real>(a: &RasterSet<T>, b: &RasterSet<T>, w: usize, h: usize) -> Vec<u64> {
    let nx = w.next_power_of_two();
    let ny = h.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd_x = planner.plan_fft_forward(nx);
    let fwd_y = planner.plan_fft_forward(ny);
    let inv_x = planner.plan_fft_inverse(nx);
    let inv_y = planner.plan_fft_inverse(ny);
    let fft2 = |grid: &mut Vec<Complex<f64>>, inverse: bool| {
        let (px, py) = if inverse {
            (&inv_x, &inv_y)
        } else {
            (&fwd_x, &fwd_y)
        };
        for row in grid.chunks_mut(nx) {
            px.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); ny];
        for x in 0..nx {
            for y in 0..ny {
                col[y] = grid[y * nx + x];
            }
            py.process(&mut col);
            for y in 0..ny {
                grid[y * nx + x] = col[y];
            }
        }
    };
    // Reverse a so that the convolution of reversed(a) with b is the
    // correlation indexed from the smallest offset.
    let mut ga = vec![Complex::new(0.0, 0.0); nx * ny];
    for (i, j) in a.occupied() {
        let x = a.width() - 1 - i;
        let y = a.height() - 1 - j;
        ga[y * nx + x] = Complex::new(1.0, 0.0);
    }
    let mut gb = vec![Complex::new(0.0, 0.0); nx * ny];
    for (k, l) in b.occupied() {
        gb[l * nx + k] = Complex::new(1.0, 0.0);
    }
    fft2(&mut ga, false);
    fft2(&mut gb, false);
    for (x, y) in ga.iter_mut().zip(&gb) {
        *x *= y;
    }
    fft2(&mut ga, true);
    let scale = (nx * ny) as f64;
    let mut counts = vec![0u64; w * h];
    for y in 0..h {
        for x in 0..w {
            let v = ga[y * nx + x].re / scale;
            counts[y * w + x] = v.round().max(0.0) as u64;
        }
    }
    counts
}

/// `ℜ(a, b)` for rasters on a common lattice.
pub fn raster_interaction<T: Real>(
    p: &RadialProfile<T>,
    a: &RasterSet<T>,
    b: &RasterSet<T>,
) -> Result<T> {
    let weights = CellWeights::for_rasters(p, a, b)?;
    weights.interaction(a, b)
}

/// `ℜ` of one square cell of side `h`, i.e. `W(0)`.
pub fn square_self_interaction<T: Real>(p: &RadialProfile<T>, side: T) -> T {
    cell_weight(p, side, 0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::shapes::RasterSet;

    fn profile(k: KernelSpec<f64>) -> RadialProfile<f64> {
        RadialProfile::new(&k).unwrap()
    }

    #[test]
    fn constant_kernel_weights_are_cell_areas() {
        let p = profile(KernelSpec::constant());
        for (dx, dy) in [(0, 0), (1, 0), (1, 1), (3, 2), (7, 11)] {
            let w = cell_weight(&p, 0.5, dx, dy);
            assert!((w - 0.0625).abs() < 1e-13, "({dx},{dy}): {w}");
        }
    }

    #[test]
    fn unit_square_self_interaction_for_linear_kernel() {
        // ∫∫_{[0,1]^4} |x - y| = (2 + √2 + 5 asinh 1) / 15.
        let p = profile(KernelSpec::power(1.0));
        let expected = (2.0 + 2f64.sqrt() + 5.0 * 1f64.asinh()) / 15.0;
        assert!((square_self_interaction(&p, 1.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn far_weight_matches_midpoint_value() {
        let p = profile(KernelSpec::power(-0.5));
        let w = cell_weight(&p, 0.1, 40, 30);
        let mid = 0.1f64.powi(4) * (0.1 * 50.0f64).powf(-0.5);
        assert!((w / mid - 1.0).abs() < 1e-3);
    }

    #[test]
    fn weights_sum_to_pairs_of_a_block() {
        // Splitting a 2x2 block into 4 cells: the block weight at pitch 2h
        // equals the sum of all 16 cell-pair weights at pitch h.
        for k in [
            KernelSpec::power(-0.5),
            KernelSpec::indicator(0.13).unwrap(),
        ] {
            let p = profile(k);
            let h = 0.1;
            let coarse = cell_weight(&p, 2.0 * h, 0, 0);
            let mut fine = 0.0;
            for i in 0..4i64 {
                for j in 0..4i64 {
                    let (a, b) = ((i % 2, i / 2), (j % 2, j / 2));
                    fine += cell_weight(&p, h, b.0 - a.0, b.1 - a.1);
                }
            }
            assert!((coarse - fine).abs() < 1e-11 * coarse, "{coarse} vs {fine}");
        }
    }

    #[test]
    fn disjoint_supports_do_not_interact_under_indicator() {
        let p = profile(KernelSpec::indicator(1.0).unwrap());
        let a = RasterSet::from_rects(0.25, &[[0.0, 1.0, 0.0, 1.0]]).unwrap();
        let b = RasterSet::from_rects(0.25, &[[3.0, 4.0, 0.0, 1.0]]).unwrap();
        assert_eq!(raster_interaction(&p, &a, &b).unwrap(), 0.0);
    }

    #[test]
    fn fft_and_direct_counts_agree() {
        let a =
            RasterSet::from_rects(1.0, &[[0.0, 30.0, 0.0, 20.0], [35.0, 40.0, 5.0, 9.0]]).unwrap();
        let b = RasterSet::from_rects(1.0, &[[10.0, 25.0, -4.0, 30.0]]).unwrap();
        let direct = pair_counts(&a, &b).unwrap();
        let fft = fft_counts(&a, &b, direct.w, direct.h);
        assert_eq!(direct.counts, fft);
    }

    #[test]
    fn difference_form_vanishes_on_equal_sets() {
        let p = profile(KernelSpec::power(-0.5));
        let a = RasterSet::from_rects(0.1, &[[0.0, 1.0, 0.0, 0.5]]).unwrap();
        let w = CellWeights::for_rasters(&p, &a, &a).unwrap();
        assert_eq!(w.difference_form(&a, &a).unwrap(), 0.0);
        let b = RasterSet::from_rects(0.1, &[[0.2, 1.3, 0.1, 0.4]]).unwrap();
        let w = CellWeights::for_rasters(&p, &a, &b).unwrap();
        let direct = w.interaction(&a, &a).unwrap() + w.interaction(&b, &b).unwrap()
            - 2.0 * w.interaction(&a, &b).unwrap();
        let form = w.difference_form(&a, &b).unwrap();
        assert!((form - direct).abs() < 1e-12 * direct.abs().max(1.0));
        assert!(form > 0.0);
    }

    #[test]
    fn interaction_is_symmetric() {
        let p = profile(KernelSpec::gauss_power(2.0, 0.5).unwrap());
        let a = RasterSet::from_rects(0.1, &[[0.0, 1.0, 0.0, 0.5]]).unwrap();
        let b = RasterSet::from_rects(0.1, &[[0.5, 0.8, -0.3, 0.9]]).unwrap();
        let ab = raster_interaction(&p, &a, &b).unwrap();
        let ba = raster_interaction(&p, &b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-14 * ab);
    }
}
