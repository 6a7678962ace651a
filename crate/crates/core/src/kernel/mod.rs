//! Radial interaction kernels and the numeric checks on them.

mod checks;
mod profile;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gl_f64, integrate, Tolerance};
use crate::real::{c, Real};

pub use checks::{
    check_decreasing, check_pd_fourier, check_pd_inequality, concentration_bound_phi,
    default_decreasing_grid, potential_phi, potential_phi_with, strip_family, strip_witness_search,
    CheckReport, FourierGrid, PairSource, PdOptions, RandomRasterPairs, StripFamily, Witness,
};
pub use profile::RadialProfile;

/// Parametric family of a radial kernel `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily<T> {
    /// `g(r) = r^alpha`.
    Power { alpha: T },
    /// `g(r) = exp(-kappa r^2) r^(-alpha)`.
    GaussPower { kappa: T, alpha: T },
    /// `g(r) = 1` for `r <= radius`, `0` beyond.
    Indicator { radius: T },
    /// `g(r) = 1`.
    Constant,
    /// Sampled profile `(r, g(r))`, linearly interpolated.
    Tabulated { table: Vec<[T; 2]> },
}

/// A radial kernel together with the ambient dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec<T> {
    #[serde(flatten)]
    pub family: KernelFamily<T>,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
}

fn default_dimension() -> usize {
    2
}

/// Value of a radial integral that may diverge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integral<T> {
    Finite(T),
    Divergent,
}

impl<T: Copy> Integral<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Integral::Finite(_))
    }

    pub fn value(&self) -> Option<T> {
        match self {
            Integral::Finite(v) => Some(*v),
            Integral::Divergent => None,
        }
    }
}

impl<T: Real> KernelSpec<T> {
    pub fn new(family: KernelFamily<T>) -> Result<Self> {
        let k = Self {
            family,
            dimension: 2,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn power(alpha: f64) -> Self {
        Self::new(KernelFamily::Power { alpha: c(alpha) }).expect("power kernel")
    }

    pub fn gauss_power(kappa: f64, alpha: f64) -> Result<Self> {
        Self::new(KernelFamily::GaussPower {
            kappa: c(kappa),
            alpha: c(alpha),
        })
    }

    pub fn indicator(radius: f64) -> Result<Self> {
        Self::new(KernelFamily::Indicator { radius: c(radius) })
    }

    pub fn constant() -> Self {
        Self::new(KernelFamily::Constant).expect("constant kernel")
    }

    pub fn tabulated(table: Vec<[T; 2]>) -> Result<Self> {
        Self::new(KernelFamily::Tabulated { table })
    }

    pub fn with_dimension(mut self, n: usize) -> Result<Self> {
        self.dimension = n;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::Argument("dimension must be positive".into()));
        }
        let n = T::from_usize_lossy(self.dimension);
        match &self.family {
            KernelFamily::Power { alpha } => {
                if !alpha.is_finite() {
                    return Err(Error::Argument("power exponent must be finite".into()));
                }
            }
            KernelFamily::GaussPower { kappa, alpha } => {
                if !(*kappa >= T::zero()) || !kappa.is_finite() {
                    return Err(Error::Argument("gauss_power needs kappa >= 0".into()));
                }
                if !(*alpha >= T::zero() && *alpha < n) {
                    return Err(Error::Argument(format!(
                        "gauss_power needs 0 <= alpha < N, got alpha = {alpha}"
                    )));
                }
            }
            KernelFamily::Indicator { radius } => {
                if !(*radius > T::zero()) || !radius.is_finite() {
                    return Err(Error::Argument("indicator radius must be positive".into()));
                }
            }
            KernelFamily::Constant => {}
            KernelFamily::Tabulated { table } => {
                if table.len() < 2 {
                    return Err(Error::Argument(
                        "tabulated kernel needs at least two samples".into(),
                    ));
                }
                if !(table[0][0] > T::zero()) {
                    return Err(Error::Argument("tabulated radii must be positive".into()));
                }
                for w in table.windows(2) {
                    if !(w[1][0] > w[0][0]) {
                        return Err(Error::Argument(
                            "tabulated radii must be strictly increasing".into(),
                        ));
                    }
                }
                if table
                    .iter()
                    .any(|p| !(p[1] >= T::zero()) || !p[1].is_finite())
                {
                    return Err(Error::Argument(
                        "tabulated values must be finite and >= 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `g(r)`; errors for `r <= 0` where the kernel is undefined.
    pub fn eval(&self, r: T) -> Result<T> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::Domain(format!("kernel evaluated at r = {r}")));
        }
        if let KernelFamily::Tabulated { table } = &self.family {
            if r < table[0][0] {
                let (k, p) = tabulated_fit(table)?;
                return Ok(k * r.powf(p));
            }
        }
        Ok(self.g(r))
    }

    /// `g(r)` without domain checks. Tabulated kernels below the first
    /// sample fall back to a constant if the log-log fit is unavailable.
    pub(crate) fn g(&self, r: T) -> T {
        match &self.family {
            KernelFamily::Power { alpha } => r.powf(*alpha),
            KernelFamily::GaussPower { kappa, alpha } => (-*kappa * r * r).exp() * r.powf(-*alpha),
            KernelFamily::Indicator { radius } => {
                if r <= *radius {
                    T::one()
                } else {
                    T::zero()
                }
            }
            KernelFamily::Constant => T::one(),
            KernelFamily::Tabulated { table } => tabulated_eval(table, r),
        }
    }

    /// Small-radius asymptotics `g(r) ~ c r^p`, returned as `(c, p)`.
    pub fn small_r_asymptotics(&self) -> Result<(T, T)> {
        Ok(match &self.family {
            KernelFamily::Power { alpha } => (T::one(), *alpha),
            KernelFamily::GaussPower { alpha, .. } => (T::one(), -*alpha),
            KernelFamily::Indicator { .. } | KernelFamily::Constant => (T::one(), T::zero()),
            KernelFamily::Tabulated { table } => tabulated_fit(table)?,
        })
    }

    /// Natural length scale: support radius, Gaussian width, or 1.
    pub fn length_scale(&self) -> T {
        match &self.family {
            KernelFamily::Indicator { radius } => *radius,
            KernelFamily::GaussPower { kappa, .. } if *kappa > T::zero() => T::one() / kappa.sqrt(),
            _ => T::one(),
        }
    }

    /// `∫_0^1 g(t) t^(N-1) dt`: finite iff the self-interaction of a ball is.
    pub fn admissibility_integral(&self) -> Result<Integral<T>> {
        self.radial_moment(self.dimension as i32 - 1)
    }

    /// `∫_0^1 g(t) t^(N-2) dt`: finiteness makes the ball potential Lipschitz.
    pub fn lipschitz_integral(&self) -> Result<Integral<T>> {
        if self.dimension < 2 {
            return Err(Error::Argument("lipschitz integral needs N >= 2".into()));
        }
        self.radial_moment(self.dimension as i32 - 2)
    }

    /// `∫_0^1 g(t) t^q dt` or divergence.
    fn radial_moment(&self, q: i32) -> Result<Integral<T>> {
        let qf = T::from_i32(q).expect("small integer");
        Ok(match &self.family {
            KernelFamily::Power { alpha } => {
                let s = *alpha + qf + T::one();
                if s > T::zero() {
                    Integral::Finite(s.recip())
                } else {
                    Integral::Divergent
                }
            }
            KernelFamily::Constant => Integral::Finite((qf + T::one()).recip()),
            KernelFamily::Indicator { radius } => {
                let top = radius.min(T::one());
                Integral::Finite(top.powi(q + 1) / (qf + T::one()))
            }
            KernelFamily::GaussPower { kappa, alpha } => {
                let s = qf - *alpha + T::one();
                if s <= T::zero() {
                    Integral::Divergent
                } else {
                    // t = u^(1/s) turns t^(s-1) dt into du/s.
                    let kappa = *kappa;
                    let e = T::two() / s;
                    let q = integrate(
                        |u: T| (-kappa * u.powf(e)).exp(),
                        T::zero(),
                        T::one(),
                        Tolerance::relative(1e-13),
                    );
                    Integral::Finite(q.require("gauss_power moment")? / s)
                }
            }
            KernelFamily::Tabulated { table } => {
                let (k, p) = tabulated_fit(table)?;
                let s = p + qf + T::one();
                if s <= T::zero() {
                    Integral::Divergent
                } else {
                    let r0 = table[0][0];
                    // The fit guarantees r0 <= 0.1.
                    let mut total = k * r0.powf(s) / s;
                    let mut lo = r0;
                    for w in table.windows(2) {
                        if lo >= T::one() {
                            break;
                        }
                        let hi = w[1][0].min(T::one());
                        if hi > lo {
                            total += gl_segment(lo, hi, |t| tabulated_eval(table, t) * t.powi(q));
                        }
                        lo = w[1][0];
                    }
                    if lo < T::one() {
                        let tail = table[table.len() - 1][1];
                        total += tail * (T::one() - lo.powf(qf + T::one())) / (qf + T::one());
                    }
                    Integral::Finite(total)
                }
            }
        })
    }

    /// Whether the ball self-interaction is finite (`admissibility_integral`).
    pub fn is_admissible(&self) -> Result<bool> {
        Ok(self.admissibility_integral()?.is_finite())
    }
}

fn gl_segment<T: Real, F: Fn(T) -> T>(a: T, b: T, f: F) -> T {
    let mid = (a + b) * T::half();
    let half = (b - a) * T::half();
    gl_f64(8).iter().fold(T::zero(), |s, &(x, w)| {
        s + c::<T>(w) * f(mid + half * c::<T>(x))
    }) * half
}

fn tabulated_eval<T: Real>(table: &[[T; 2]], r: T) -> T {
    let last = table[table.len() - 1];
    if r >= last[0] {
        return last[1];
    }
    if r <= table[0][0] {
        return match tabulated_fit(table) {
            Ok((k, p)) => k * r.powf(p),
            Err(_) => table[0][1],
        };
    }
    let idx = table.partition_point(|p| p[0] <= r);
    let (a, b) = (table[idx - 1], table[idx]);
    let w = (r - a[0]) / (b[0] - a[0]);
    a[1] + w * (b[1] - a[1])
}

/// Least-squares log-log slope over the smallest sampled decade, anchored at
/// the first sample so the extension is continuous.
fn tabulated_fit<T: Real>(table: &[[T; 2]]) -> Result<(T, T)> {
    let r0 = table[0][0];
    if r0 > c(0.1) {
        return Err(Error::InsufficientData(format!(
            "tabulated kernel has no samples near 0 (first radius {r0})"
        )));
    }
    let decade: Vec<[T; 2]> = table
        .iter()
        .copied()
        .filter(|p| p[0] <= r0 * c(10.0))
        .collect();
    if decade.len() < 2 || decade.iter().any(|p| p[1] <= T::zero()) {
        return Err(Error::InsufficientData(
            "need two positive samples in the smallest decade".into(),
        ));
    }
    let n = T::from_usize_lossy(decade.len());
    let (mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero());
    for p in &decade {
        let (x, y) = (p[0].ln(), p[1].ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok((table[0][1] / r0.powf(slope), slope))
}

impl<T: Real> fmt::Display for KernelSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            KernelFamily::Power { alpha } => write!(f, "power(alpha={alpha}")?,
            KernelFamily::GaussPower { kappa, alpha } => {
                write!(f, "gauss_power(kappa={kappa}, alpha={alpha}")?
            }
            KernelFamily::Indicator { radius } => write!(f, "indicator(radius={radius}")?,
            KernelFamily::Constant => write!(f, "constant(")?,
            KernelFamily::Tabulated { table } => write!(f, "tabulated(samples={}", table.len())?,
        }
        if self.dimension != 2 {
            let sep = if matches!(self.family, KernelFamily::Constant) {
                ""
            } else {
                ", "
            };
            write!(f, "{sep}dimension={}", self.dimension)?;
        }
        write!(f, ")")
    }
}

/// Parses the config grammar `family(name=value, ...)`, e.g.
/// `power(alpha=-0.5)` or `gauss_power(kappa=1, alpha=0.5, dimension=2)`.
/// Tabulated kernels are built from sample lists, not from this grammar.
impl<T: Real> FromStr for KernelSpec<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(open) => {
                if !s.ends_with(')') {
                    return Err(Error::Parse(format!("missing ')' in kernel spec {s:?}")));
                }
                (s[..open].trim(), &s[open + 1..s.len() - 1])
            }
            None => (s, ""),
        };
        let mut params: Vec<(String, f64)> = Vec::new();
        for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {part:?}")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number in {part:?}")))?;
            params.push((key.trim().to_string(), value));
        }
        let mut take = |key: &str| -> Option<f64> {
            let pos = params.iter().position(|(k, _)| k == key)?;
            Some(params.remove(pos).1)
        };
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::Parse(format!("kernel {name} needs parameter {key}")))
        };
        let dimension = take("dimension");
        let family = match name {
            "power" => KernelFamily::Power {
                alpha: c(need(take("alpha"), "alpha")?),
            },
            "gauss_power" => KernelFamily::GaussPower {
                kappa: c(need(take("kappa"), "kappa")?),
                alpha: c(need(take("alpha"), "alpha")?),
            },
            "indicator" => KernelFamily::Indicator {
                radius: c(need(take("radius"), "radius")?),
            },
            "constant" => KernelFamily::Constant,
            other => return Err(Error::Parse(format!("unknown kernel family {other:?}"))),
        };
        if let Some((key, _)) = params.first() {
            return Err(Error::Parse(format!(
                "unknown parameter {key:?} for {name}"
            )));
        }
        let mut spec = KernelSpec::new(family)?;
        if let Some(d) = dimension {
            if d < 1.0 || d.fract() != 0.0 {
                return Err(Error::Parse(format!(
                    "dimension must be a positive integer, got {d}"
                )));
            }
            spec = spec.with_dimension(d as usize)?;
        }
        Ok(spec)
    }
}
