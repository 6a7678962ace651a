//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    /// Convert an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for [`Real::lit`].
#[inline]
pub(crate) fn c<T: Real>(x: f64) -> T {
    T::lit(x)
}

/// `(x - sin x) / x^3`, accurate near zero.
pub(crate) fn x_minus_sin_over_cube<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax < c(0.3) {
        // 1/6 - x^2/120 + x^4/5040 - x^6/362880 + x^8/39916800
        let x2 = x * x;
        c::<T>(1.0 / 6.0)
            - x2 * (c::<T>(1.0 / 120.0)
                - x2 * (c::<T>(1.0 / 5040.0)
                    - x2 * (c::<T>(1.0 / 362880.0) - x2 * c::<T>(1.0 / 39916800.0))))
    } else {
        (x - x.sin()) / (x * x * x)
    }
}

/// `(sin x - x cos x) / x^3`, accurate near zero.
pub(crate) fn sin_minus_x_cos_over_cube<T: Real>(x: T) -> T {
    if x.abs() < c(0.3) {
        // 1/3 - x^2/30 + x^4/840 - x^6/45360 + x^8/3991680
        let x2 = x * x;
        c::<T>(1.0 / 3.0)
            - x2 * (c::<T>(1.0 / 30.0)
                - x2 * (c::<T>(1.0 / 840.0)
                    - x2 * (c::<T>(1.0 / 45360.0) - x2 * c::<T>(1.0 / 3991680.0))))
    } else {
        (x.sin() - x * x.cos()) / (x * x * x)
    }
}

/// `sin x / x` with the removable singularity filled in.
pub(crate) fn sinc<T: Real>(x: T) -> T {
    if x.abs() < c(1e-4) {
        T::one() - x * x / c(6.0)
    } else {
        x.sin() / x
    }
}

/// Riemann zeta for real `s > 1`, by Euler-Maclaurin summation.
pub(crate) fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta evaluated at s = {s} <= 1");
    const N: usize = 12;
    let n = N as f64;
    let mut sum = 0.0;
    for k in 1..N {
        sum += (k as f64).powf(-s);
    }
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // Bernoulli corrections B_{2j}/(2j)! * s(s+1)...(s+2j-2) * n^{-s-2j+1}
    const B2J: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let mut rising = s;
    let mut fact = 2.0;
    for (j, b) in B2J.iter().enumerate() {
        let p = 2 * j + 1;
        sum += b / fact * rising * n.powf(-s - p as f64);
        rising *= (s + p as f64) * (s + p as f64 + 1.0);
        fact *= ((p + 2) * (p + 3)) as f64;
    }
    sum
}

/// Riemann zeta at a negative non-integer argument `-p` (`p > 0`), via the
/// functional equation.
pub(crate) fn zeta_negative(p: f64) -> f64 {
    let s = 1.0 + p;
    let two_pi = 2.0 * std::f64::consts::PI;
    2.0 * two_pi.powf(-s) * (std::f64::consts::FRAC_PI_2 * s).cos() * gamma(s) * zeta(s)
}

/// Gamma function for positive arguments (Lanczos, g = 7).
pub(crate) fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        let t = x + G + 0.5;
        for (i, coef) in COEF.iter().enumerate().skip(1) {
            a += coef / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_known_values() {
        let pi = std::f64::consts::PI;
        assert!((zeta(2.0) - pi * pi / 6.0).abs() < 1e-13);
        assert!((zeta(4.0) - pi.powi(4) / 90.0).abs() < 1e-13);
        assert!((zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-12);
    }

    #[test]
    fn zeta_negative_values() {
        // zeta(-1) = -1/12, zeta(-2) = 0, zeta(-1/2) = -0.2078862250...
        assert!((zeta_negative(1.0) + 1.0 / 12.0).abs() < 1e-12);
        assert!(zeta_negative(2.0).abs() < 1e-14);
        assert!((zeta_negative(0.5) + 0.207_886_224_977_354_9).abs() < 1e-12);
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(5.0) - 24.0).abs() < 1e-10);
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn series_helpers() {
        for &x in &[1e-6f64, 0.1, 0.29, 0.31, 1.0, 3.0] {
            let direct = (x - x.sin()) / (x * x * x);
            let tol = if x < 1e-3 { 1e-3 } else { 1e-9 };
            assert!((x_minus_sin_over_cube(x) - direct).abs() < tol, "x = {x}");
        }
        assert!((sinc(1e-9f64) - 1.0).abs() < 1e-15);
        assert!((sinc(0.5f64) - 0.5f64.sin() / 0.5).abs() < 1e-15);
    }
}
