//! Numeric checks of kernel hypotheses: monotonicity, positive
//! definiteness, the ball potential and the concentration bound.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{KernelFamily, KernelSpec, RadialProfile};
use crate::energy::{origin_cell_average, CellWeights};
use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};
use crate::real::{c, Real};
use crate::shapes::RasterSet;

/// A counterexample found by a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub values: Vec<f64>,
}

/// Outcome of a check; `passed` holds exactly when no witness was found.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub passed: bool,
    pub witnesses: Vec<Witness>,
    pub extremal_ratio: f64,
    pub samples_used: usize,
    #[serde(default)]
    pub flags: BTreeMap<String, bool>,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl CheckReport {
    pub(crate) fn finish(mut self) -> Self {
        self.passed = self.witnesses.is_empty();
        self
    }
}

/// Log-spaced radii in `[1e-3, 1e2]` crossed with a few dilation factors.
pub fn default_decreasing_grid<T: Real>() -> Vec<(T, T)> {
    let lambdas = [1.01, 1.1, 1.5, 2.0, 4.0, 10.0];
    (0..=50)
        .flat_map(|i| {
            let r = 10f64.powf(-3.0 + 5.0 * i as f64 / 50.0);
            lambdas.iter().map(move |&l| (c(r), c(l)))
        })
        .collect()
}

/// Checks `g(λr) ≤ g(r)` on the grid of `(r, λ)` pairs. The weaker
/// `g(λr) ≤ λ g(r)` is reported as the flag `literal_def_holds`.
pub fn check_decreasing<T: Real>(k: &KernelSpec<T>, grid: &[(T, T)]) -> Result<CheckReport> {
    if grid.is_empty() {
        return Err(Error::Argument(
            "decreasing check needs a non-empty grid".into(),
        ));
    }
    let mut report = CheckReport::default();
    let mut literal = true;
    let mut worst = 0.0f64;
    for &(r, lambda) in grid {
        if !(r > T::zero()) || !(lambda > T::one()) {
            return Err(Error::Argument(format!(
                "grid needs r > 0 and lambda > 1, got ({r}, {lambda})"
            )));
        }
        let (g0, g1) = (k.eval(r)?, k.eval(lambda * r)?);
        if g1 > lambda * g0 {
            literal = false;
        }
        if g1 > g0 {
            report.witnesses.push(Witness {
                label: "g(lambda r) > g(r)".into(),
                values: [r, lambda, g0, g1]
                    .iter()
                    .map(|v| v.to_f64_lossy())
                    .collect(),
            });
        }
        if g0 > T::zero() {
            worst = worst.max((g1 / g0).to_f64_lossy());
        } else if g1 > T::zero() {
            worst = f64::INFINITY;
        }
    }
    report.extremal_ratio = worst;
    report.samples_used = grid.len();
    report.flags.insert("literal_def_holds".into(), literal);
    Ok(report.finish())
}

/// Source of raster pairs `(F, G)` on a common lattice.
pub trait PairSource<T> {
    fn next_pair(&mut self) -> Option<(RasterSet<T>, RasterSet<T>)>;

    fn describe(&self) -> String {
        "pairs".into()
    }
}

/// Random subsets of an `n × n` block of cells, alternating between
/// independent fills and unions of rectangles.
#[derive(Clone, Debug)]
pub struct RandomRasterPairs<T> {
    pub pitch: T,
    pub cells: usize,
    rng: ChaCha8Rng,
    drawn: usize,
}

impl<T: Real> RandomRasterPairs<T> {
    pub fn new(pitch: T, cells: usize, seed: u64) -> Result<Self> {
        if !(pitch > T::zero()) || cells == 0 {
            return Err(Error::Argument(
                "random rasters need pitch > 0 and cells > 0".into(),
            ));
        }
        Ok(Self {
            pitch,
            cells,
            rng: ChaCha8Rng::seed_from_u64(seed),
            drawn: 0,
        })
    }

    fn draw(&mut self) -> RasterSet<T> {
        let n = self.cells;
        let mut mask = vec![false; n * n];
        if self.drawn % 2 == 0 {
            let fill: f64 = self.rng.gen_range(0.05..0.95);
            for m in mask.iter_mut() {
                *m = self.rng.gen_bool(fill);
            }
        } else {
            for _ in 0..self.rng.gen_range(1..=4) {
                let (x0, y0) = (self.rng.gen_range(0..n), self.rng.gen_range(0..n));
                let (x1, y1) = (self.rng.gen_range(x0..n), self.rng.gen_range(y0..n));
                for j in y0..=y1 {
                    for i in x0..=x1 {
                        mask[j * n + i] = true;
                    }
                }
            }
        }
        self.drawn += 1;
        RasterSet::new([T::zero(); 2], self.pitch, n, n, mask).expect("valid dimensions")
    }
}

impl<T: Real> PairSource<T> for RandomRasterPairs<T> {
    fn next_pair(&mut self) -> Option<(RasterSet<T>, RasterSet<T>)> {
        Some((self.draw(), self.draw()))
    }

    fn describe(&self) -> String {
        format!("random {}x{} rasters", self.cells, self.cells)
    }
}

/// One-cell-wide vertical strips of the given length: `F` holds strips at
/// abscissae `0` and `2d`, `G` a single strip at `d`, for `d` running over
/// `offsets` (in cells).
#[derive(Clone, Debug)]
pub struct StripFamily<T> {
    pub pitch: T,
    pub length_cells: usize,
    pub offsets: Vec<usize>,
    next: usize,
}

impl<T: Real> StripFamily<T> {
    pub fn new(pitch: T, length_cells: usize, offsets: Vec<usize>) -> Result<Self> {
        if !(pitch > T::zero()) || length_cells == 0 || offsets.contains(&0) {
            return Err(Error::Argument(
                "strips need pitch > 0, length > 0, offsets > 0".into(),
            ));
        }
        Ok(Self {
            pitch,
            length_cells,
            offsets,
            next: 0,
        })
    }

    pub fn pair(&self, d: usize) -> (RasterSet<T>, RasterSet<T>) {
        let (w, h) = (2 * d + 1, self.length_cells);
        let f = RasterSet::from_fn([T::zero(); 2], self.pitch, w, h, |i, _| {
            i == 0 || i == 2 * d
        });
        let g = RasterSet::from_fn([T::zero(); 2], self.pitch, w, h, |i, _| i == d);
        (f.expect("valid strips"), g.expect("valid strips"))
    }
}

impl<T: Real> PairSource<T> for StripFamily<T> {
    fn next_pair(&mut self) -> Option<(RasterSet<T>, RasterSet<T>)> {
        let d = *self.offsets.get(self.next)?;
        self.next += 1;
        Some(self.pair(d))
    }

    fn describe(&self) -> String {
        format!("strip triples, {} offsets", self.offsets.len())
    }
}

/// Options for [`check_pd_inequality`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdOptions {
    /// Slack below `-tolerance` counts as a violation.
    pub tolerance: f64,
}

impl Default for PdOptions {
    fn default() -> Self {
        Self { tolerance: 1e-6 }
    }
}

/// Checks `ℜ(F) + ℜ(G) ≥ 2ℜ(F, G)` on `n_pairs` pairs from `source`.
///
/// The slack is the quadratic form of `χ_F − χ_G`, so it is exactly zero
/// when `F = G`. Witness values are `[pair index, slack, |F|, |G|]`.
pub fn check_pd_inequality<T: Real>(
    k: &KernelSpec<T>,
    source: &mut dyn PairSource<T>,
    n_pairs: usize,
    opts: PdOptions,
) -> Result<CheckReport> {
    let profile = RadialProfile::new(k)?;
    let mut weights: Option<CellWeights<T>> = None;
    let mut report = CheckReport::default();
    let (mut min_slack, mut max_slack) = (f64::INFINITY, f64::NEG_INFINITY);
    for index in 0..n_pairs {
        let Some((f, g)) = source.next_pair() else {
            break;
        };
        let needed = CellWeights::for_rasters(&profile, &f, &g).map(|w| (w.pitch(), w.extent()));
        let (pitch, extent) = needed?;
        let stale = weights.as_ref().map_or(true, |w| {
            w.extent() < extent || (w.pitch() - pitch).abs() > pitch * c(1e-12)
        });
        if stale {
            weights = Some(CellWeights::new(&profile, pitch, extent)?);
        }
        let slack = weights
            .as_ref()
            .expect("built above")
            .difference_form(&f, &g)?
            .to_f64_lossy();
        min_slack = min_slack.min(slack);
        max_slack = max_slack.max(slack);
        if slack < -opts.tolerance {
            report.witnesses.push(Witness {
                label: format!("{} #{index}", source.describe()),
                values: vec![
                    index as f64,
                    slack,
                    f.area().to_f64_lossy(),
                    g.area().to_f64_lossy(),
                ],
            });
        }
        report.samples_used += 1;
    }
    if report.samples_used == 0 {
        return Err(Error::Argument("pair source produced no pairs".into()));
    }
    report.extremal_ratio = min_slack;
    report.metrics.insert("min_slack".into(), min_slack);
    report.metrics.insert("max_slack".into(), max_slack);
    Ok(report.finish())
}

/// Directed search over strip triples at all offsets up to 1.5 kernel
/// length scales, which exposes kernels that are not positive definite
/// (for an indicator of radius `ρ`, offsets a little above `ρ/2`).
pub fn strip_witness_search<T: Real>(k: &KernelSpec<T>, pitch: T) -> Result<CheckReport> {
    let mut family = strip_family(k, pitch)?;
    let n = family.offsets.len();
    check_pd_inequality(k, &mut family, n, PdOptions::default())
}

/// The strip triples searched by [`strip_witness_search`].
pub fn strip_family<T: Real>(k: &KernelSpec<T>, pitch: T) -> Result<StripFamily<T>> {
    let scale = k.length_scale();
    let cells = |x: T| (x / pitch).round().to_usize().unwrap_or(0).max(1);
    let max_offset = cells(c::<T>(1.5) * scale);
    StripFamily::new(pitch, cells(T::two() * scale), (1..=max_offset).collect())
}

/// Sampling parameters for [`check_pd_fourier`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierGrid {
    /// Samples per axis.
    pub samples: usize,
    /// Window width in kernel length scales.
    pub window: f64,
    /// Allowed negative mode, relative to the largest mode.
    pub tolerance: f64,
}

impl Default for FourierGrid {
    fn default() -> Self {
        Self {
            samples: 512,
            window: 20.0,
            tolerance: 1e-6,
        }
    }
}

/// Discrete Fourier transform of `g` sampled on a centered periodic grid.
///
/// This is a heuristic surrogate for a nonnegative transform: truncation to
/// the window and discretization both perturb the spectrum. The sample at
/// the origin is replaced by the cell average, which keeps singular kernels
/// finite. Witnesses are the most negative modes as `[k₁, k₂, value]`.
pub fn check_pd_fourier<T: Real>(k: &KernelSpec<T>, grid: FourierGrid) -> Result<CheckReport> {
    let dim = k.dimension;
    if !(1..=2).contains(&dim) {
        return Err(Error::Argument(format!(
            "Fourier check supports N = 1, 2, got {dim}"
        )));
    }
    if grid.samples < 4 || !(grid.window > 0.0) {
        return Err(Error::Argument(
            "Fourier grid needs >= 4 samples and a positive window".into(),
        ));
    }
    if let KernelFamily::Power { alpha } = &k.family {
        if *alpha > T::zero() {
            return Err(Error::Precondition(format!(
                "kernel {k} is unbounded at infinity"
            )));
        }
    }
    let n = grid.samples;
    let scale = k.length_scale().to_f64_lossy();
    let h = grid.window * scale / n as f64;
    let gf = |r: f64| k.g(c(r)).to_f64_lossy();
    let origin = if dim == 2 {
        origin_cell_average(&RadialProfile::new(k)?, c(h)).to_f64_lossy()
    } else {
        let q = integrate(gf, 0.0, 0.5 * h, Tolerance::relative(1e-10));
        q.require("origin cell average")? * 2.0 / h
    };
    let coord = |i: usize| if i < n / 2 { i as f64 } else { i as f64 - n as f64 } * h;
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let spectrum: Vec<f64> = if dim == 1 {
        let mut buf: Vec<Complex<f64>> = (0..n)
            .map(|i| Complex::new(if i == 0 { origin } else { gf(coord(i).abs()) }, 0.0))
            .collect();
        fft.process(&mut buf);
        buf.iter().map(|z| z.re * h).collect()
    } else {
        let mut buf: Vec<Complex<f64>> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx % n, idx / n);
                let v = if idx == 0 {
                    origin
                } else {
                    gf(coord(i).hypot(coord(j)))
                };
                Complex::new(v, 0.0)
            })
            .collect();
        for row in buf.chunks_mut(n) {
            fft.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                col[j] = buf[j * n + i];
            }
            fft.process(&mut col);
            for j in 0..n {
                buf[j * n + i] = col[j];
            }
        }
        buf.iter().map(|z| z.re * h * h).collect()
    };
    let max = spectrum.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = spectrum.iter().cloned().fold(f64::INFINITY, f64::min);
    let floor = -grid.tolerance * max.abs();
    let mut negative: Vec<(usize, f64)> = spectrum
        .iter()
        .cloned()
        .enumerate()
        .filter(|&(_, v)| v < floor)
        .collect();
    negative.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite spectrum"));
    let mut report = CheckReport::default();
    let mode = |i: usize| {
        if i < n / 2 {
            i as f64
        } else {
            i as f64 - n as f64
        }
    };
    for &(idx, v) in negative.iter().take(16) {
        let (i, j) = (idx % n, idx / n);
        report.witnesses.push(Witness {
            label: "negative mode".into(),
            values: vec![mode(i), if dim == 2 { mode(j) } else { 0.0 }, v],
        });
    }
    report.extremal_ratio = if max != 0.0 { min / max } else { 0.0 };
    report.samples_used = spectrum.len();
    report.metrics.insert("min_mode".into(), min);
    report.metrics.insert("max_mode".into(), max);
    report
        .metrics
        .insert("negative_modes".into(), negative.len() as f64);
    report.metrics.insert("spacing".into(), h);
    let edge = gf(0.5 * grid.window * scale);
    let reference = gf(scale);
    let truncated = reference > 0.0 && edge > 1e-6 * reference;
    report
        .flags
        .insert("window_truncates_kernel".into(), truncated);
    if truncated {
        report.warnings.push(format!(
            "window too small for the kernel decay: g at the window edge is {:.3e} of g at the length scale",
            edge / reference
        ));
    }
    Ok(report.finish())
}

/// `Φ(t) = ∫_B g(|y − x|) dx` for `|y| = t`, with `B` the unit disk.
pub fn potential_phi<T: Real>(k: &KernelSpec<T>, t: T) -> Result<T> {
    potential_phi_with(k, t, 1e-11)
}

/// [`potential_phi`] with an explicit relative tolerance.
///
/// Polar coordinates about `y` reduce the area integral to an angular
/// integral of `gint(ρ) = ∫_0^ρ g(s) s ds` along the chord ends. For
/// `t > 1` the angle is reparametrized so the square-root endpoint of the
/// visible arc becomes smooth.
pub fn potential_phi_with<T: Real>(k: &KernelSpec<T>, t: T, rel_tol: f64) -> Result<T> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::Argument(format!("potential needs t >= 0, got {t}")));
    }
    if k.dimension != 2 {
        return Err(Error::Argument("potential is defined for N = 2".into()));
    }
    let p = RadialProfile::new(k)?;
    let tol = Tolerance::relative(rel_tol);
    let mut total = T::zero();
    if t < T::one() {
        // Distance from y to the circle along a ray at angle φ from -y.
        let reach = |phi: T| {
            let s = t * phi.sin();
            (T::one() - s * s).max(T::zero()).sqrt() - t * phi.cos()
        };
        for (a, b) in [(T::zero(), T::FRAC_PI_2()), (T::FRAC_PI_2(), T::PI())] {
            let q = integrate(|phi| p.gint(reach(phi)), a, b, tol);
            total += q.require("ball potential")?;
        }
    } else {
        // sin φ = sin ψ / t; the chord is t cos φ ± cos ψ.
        let body = |psi: T| {
            let (sp, cp) = psi.sin_cos();
            let s = sp / t;
            let cphi = (T::one() - s * s).max(T::zero()).sqrt();
            let mid = t * cphi;
            let lo = (mid - cp).max(T::zero());
            (p.gint(mid + cp) - p.gint(lo)) * cp / mid
        };
        let q = integrate(body, T::zero(), T::FRAC_PI_2(), tol);
        total += q.require("ball potential")?;
    }
    Ok(T::two() * total)
}

/// `φ(σ) = 2π ∫_0^{√(σ/π)} g(s) s ds`, the largest interaction of a unit
/// point mass with a set of area `σ` when `g` is radial and decreasing.
pub fn concentration_bound_phi<T: Real>(k: &KernelSpec<T>, sigma: T) -> Result<T> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::Argument(format!(
            "concentration bound needs sigma > 0, got {sigma}"
        )));
    }
    let p = RadialProfile::new(k)?;
    Ok(T::TAU() * p.gint((sigma / T::PI()).sqrt()))
}
