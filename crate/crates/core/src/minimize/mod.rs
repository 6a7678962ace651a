//! Volume-constrained minimization of `P + ε ℜ` over star shapes, the
//! generalized problem over component lists, ε-sweeps and a desk-scale test
//! of ball minimality.
//!
//! The optimizer is derivative-free: one Fourier coefficient is perturbed at
//! a time, the volume is restored by rescaling, and the move is kept only if
//! the energy drops by more than `tol_energy`. During descent the energy is
//! evaluated on a fixed number of boundary nodes so that every comparison
//! uses the same discretization; reported energies are recomputed with the
//! adaptive quadrature.

mod svg;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{
    self_interaction_fixed, ComponentList, EnergyBreakdown, EnergyModel, QuadratureSettings, Shape,
};
use crate::error::{Error, Result};
use crate::kernel::{
    check_decreasing, check_pd_inequality, default_decreasing_grid, CheckReport, KernelSpec,
    PdOptions, RadialProfile, RandomRasterPairs, Witness,
};
use crate::real::{c, Real};
use crate::shapes::{fraenkel_center, AsymmetryReport, StarShape};

pub use svg::{shapes_svg, sweep_svg};

/// Optimizer and search parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Modes `1..=n_modes` are optimized; higher modes of a start stay fixed.
    pub n_modes: u32,
    /// Maximum number of sweeps over all coordinates.
    pub max_iters: usize,
    pub step_init: f64,
    pub step_shrink: f64,
    pub tol_energy: f64,
    pub tol_step: f64,
    pub seed: u64,
    /// Boundary nodes for perimeter and interaction during descent.
    pub descent_nodes: usize,
    /// Mass allocations are multiples of `1 / mass_grid`.
    pub mass_grid: usize,
    /// Rounds of halving the allocation spacing around the incumbent.
    pub mass_refinements: usize,
    /// Components searched by the sweep.
    pub max_components: usize,
    /// Largest coefficient of a random start, divided by the mode index.
    pub perturbation_amplitude: f64,
    /// Final asymmetry accepted by the ball minimality test.
    pub asymmetry_tol: f64,
    /// Step used to re-verify local optimality of returned components.
    pub verify_step: f64,
    pub quadrature: QuadratureSettings,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_modes: 8,
            max_iters: 200,
            step_init: 0.05,
            step_shrink: 0.5,
            tol_energy: 1e-11,
            tol_step: 1e-6,
            seed: 0,
            descent_nodes: 256,
            mass_grid: 8,
            mass_refinements: 2,
            max_components: 2,
            perturbation_amplitude: 0.1,
            asymmetry_tol: 1e-2,
            verify_step: 1e-3,
            quadrature: QuadratureSettings::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("step_init", self.step_init),
            ("tol_energy", self.tol_energy),
            ("tol_step", self.tol_step),
            ("perturbation_amplitude", self.perturbation_amplitude),
            ("asymmetry_tol", self.asymmetry_tol),
            ("verify_step", self.verify_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Argument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return Err(Error::Argument(format!(
                "step_shrink must lie in (0, 1), got {}",
                self.step_shrink
            )));
        }
        if self.n_modes == 0 {
            return Err(Error::Argument("n_modes must be >= 1".into()));
        }
        if self.descent_nodes < 16 {
            return Err(Error::Argument("descent_nodes must be >= 16".into()));
        }
        if self.mass_grid < 2 {
            return Err(Error::Argument("mass_grid must be >= 2".into()));
        }
        if self.max_components == 0 {
            return Err(Error::Argument("max_components must be >= 1".into()));
        }
        Ok(())
    }
}

/// One sweep over the coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub area: f64,
    pub accepted_moves: usize,
    pub max_step: f64,
}

/// History and outcome of a minimization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MinimizeTrace<T: Real> {
    /// Energies after each accepted move, starting with the start energy.
    pub energies: Vec<T>,
    pub iterations: Vec<IterationRecord>,
    pub shapes: Vec<StarShape<T>>,
    /// Final energy with adaptive quadrature.
    pub energy: EnergyBreakdown<T>,
    /// Asymmetry of each final shape after rescaling it to area π.
    pub asymmetry: Vec<AsymmetryReport<T>>,
    pub converged: bool,
    /// Whether every returned component passed the local optimality recheck.
    pub locally_optimal: bool,
    pub evaluations: usize,
    /// Seconds; the only field that varies between identical runs.
    pub wall_time: f64,
}

impl<T: Real> MinimizeTrace<T> {
    pub fn max_asymmetry(&self) -> T {
        self.asymmetry
            .iter()
            .fold(T::zero(), |m, a| m.max(a.asymmetry))
    }

    pub fn start_energy(&self) -> T {
        self.energies[0]
    }

    pub fn final_descent_energy(&self) -> T {
        self.energies[self.energies.len() - 1]
    }
}

/// Rescales `s` about its center to the given area.
pub fn project_volume<T: Real>(s: &StarShape<T>, target: T) -> Result<StarShape<T>> {
    if !(target > T::zero()) || !target.is_finite() {
        return Err(Error::Argument(format!(
            "target area must be positive, got {target}"
        )));
    }
    let area = s.area();
    if !(area > T::zero()) || !area.is_finite() {
        return Err(Error::Domain(format!(
            "cannot rescale a shape of area {area}"
        )));
    }
    s.with_r0(s.r0() * (target / area).sqrt())
}

/// Random star shape of area π centered at the origin with modes
/// `1..=n_modes`; mode `k` has coefficients uniform in `±amplitude / k`.
pub fn random_start<T: Real>(seed: u64, n_modes: u32, amplitude: f64) -> Result<StarShape<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = (1..=n_modes)
        .map(|k| {
            let a = amplitude / k as f64;
            (
                k,
                c::<T>(rng.gen_range(-a..=a)),
                c::<T>(rng.gen_range(-a..=a)),
            )
        })
        .collect();
    project_volume(&StarShape::new([T::zero(); 2], T::one(), modes)?, T::PI())
}

/// Energy on fixed nodes, counting evaluations.
struct Evaluator<'a, T: Real> {
    profile: &'a RadialProfile<T>,
    epsilon: T,
    nodes: usize,
    count: usize,
}

impl<T: Real> Evaluator<'_, T> {
    fn energy(&mut self, s: &StarShape<T>) -> T {
        self.count += 1;
        let p = s.perimeter_with(self.nodes);
        if self.epsilon == T::zero() {
            return p;
        }
        p + self.epsilon * self_interaction_fixed(self.profile, s, self.nodes)
    }
}

/// Coefficient vector `(a_1, b_1, …, a_n, b_n)` plus the fixed higher modes.
struct Coordinates<T> {
    x: Vec<T>,
    fixed: Vec<(u32, T, T)>,
}

impl<T: Real> Coordinates<T> {
    fn of(s: &StarShape<T>, n_modes: u32) -> Self {
        let mut x = vec![T::zero(); 2 * n_modes as usize];
        let mut fixed = Vec::new();
        for &(k, a, b) in s.modes() {
            if k <= n_modes {
                let i = 2 * (k as usize - 1);
                x[i] = a;
                x[i + 1] = b;
            } else {
                fixed.push((k, a, b));
            }
        }
        Self { x, fixed }
    }

    fn shape(&self, like: &StarShape<T>, x: &[T], area: T) -> Result<StarShape<T>> {
        let mut modes: Vec<(u32, T, T)> = x
            .chunks(2)
            .enumerate()
            .filter(|(_, ab)| ab[0] != T::zero() || ab[1] != T::zero())
            .map(|(i, ab)| (i as u32 + 1, ab[0], ab[1]))
            .collect();
        modes.extend(self.fixed.iter().copied());
        project_volume(&like.with_modes(modes)?, area)
    }
}

struct Descent<T: Real> {
    shape: StarShape<T>,
    energies: Vec<T>,
    iterations: Vec<IterationRecord>,
    converged: bool,
}

/// Projected coordinate descent at fixed area.
fn descend<T: Real>(
    eval: &mut Evaluator<'_, T>,
    start: &StarShape<T>,
    area: T,
    cfg: &OptimizerConfig,
) -> Result<Descent<T>> {
    let mut shape = project_volume(start, area)?;
    let coords = Coordinates::of(&shape, cfg.n_modes);
    let mut x = coords.x.clone();
    let mut current = eval.energy(&shape);
    let mut energies = vec![current];
    let mut iterations = Vec::new();
    let mut steps = vec![cfg.step_init; x.len()];
    let tol_energy = c::<T>(cfg.tol_energy);
    let mut converged = false;
    for iteration in 0..cfg.max_iters {
        if steps.iter().all(|&h| h < cfg.tol_step) {
            converged = true;
            break;
        }
        let mut accepted = 0;
        for i in 0..x.len() {
            if steps[i] < cfg.tol_step {
                continue;
            }
            let mut moved = false;
            for sign in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[i] += c::<T>(sign * steps[i]);
                // Trials that lose positivity of the radius are rejected.
                let Ok(candidate) = coords.shape(&shape, &trial, area) else {
                    continue;
                };
                let e = eval.energy(&candidate);
                if e < current - tol_energy {
                    x = trial;
                    shape = candidate;
                    current = e;
                    energies.push(e);
                    accepted += 1;
                    moved = true;
                    break;
                }
            }
            if !moved {
                steps[i] *= cfg.step_shrink;
            }
        }
        iterations.push(IterationRecord {
            iteration,
            energy: current.to_f64_lossy(),
            area: shape.area().to_f64_lossy(),
            accepted_moves: accepted,
            max_step: steps.iter().fold(0.0, |m: f64, &h| m.max(h)),
        });
    }
    if !converged && steps.iter().all(|&h| h < cfg.tol_step) {
        converged = true;
    }
    Ok(Descent {
        shape,
        energies,
        iterations,
        converged,
    })
}

/// Whether no single coordinate move of `cfg.verify_step` lowers the energy.
fn locally_optimal<T: Real>(
    eval: &mut Evaluator<'_, T>,
    s: &StarShape<T>,
    cfg: &OptimizerConfig,
) -> bool {
    let area = s.area();
    let coords = Coordinates::of(s, cfg.n_modes);
    let base = eval.energy(s);
    for i in 0..coords.x.len() {
        for sign in [1.0, -1.0] {
            let mut trial = coords.x.clone();
            trial[i] += c::<T>(sign * cfg.verify_step);
            if let Ok(t) = coords.shape(s, &trial, area) {
                if eval.energy(&t) < base - c::<T>(cfg.tol_energy) {
                    return false;
                }
            }
        }
    }
    true
}

/// Asymmetry of `s` after rescaling to area π about its center.
fn normalized_asymmetry<T: Real>(s: &StarShape<T>) -> Result<AsymmetryReport<T>> {
    fraenkel_center(&project_volume(s, T::PI())?)
}

fn context(what: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::ToleranceNotMet {
            context,
            estimate,
            error,
        } => Error::ToleranceNotMet {
            context: format!("{what}: {context}"),
            estimate,
            error,
        },
        other => other,
    }
}

/// Minimizes `P + ε ℜ` over star shapes of area π from `start`.
pub fn minimize_single<T: Real>(
    k: &KernelSpec<T>,
    epsilon: T,
    start: &StarShape<T>,
    cfg: &OptimizerConfig,
) -> Result<MinimizeTrace<T>> {
    cfg.validate()?;
    check_epsilon(epsilon)?;
    let clock = Instant::now();
    let model = EnergyModel::new(k, cfg.quadrature)?;
    let mut eval = Evaluator {
        profile: model.profile(),
        epsilon,
        nodes: cfg.descent_nodes,
        count: 0,
    };
    let d = descend(&mut eval, start, T::PI(), cfg)?;
    let energy = model
        .energy(epsilon, &Shape::Star(d.shape.clone()))
        .map_err(context("final iterate"))?;
    let asymmetry = vec![normalized_asymmetry(&d.shape)?];
    let locally_optimal = locally_optimal(&mut eval, &d.shape, cfg);
    Ok(MinimizeTrace {
        energies: d.energies,
        iterations: d.iterations,
        shapes: vec![d.shape],
        energy,
        asymmetry,
        converged: d.converged,
        locally_optimal,
        evaluations: eval.count,
        wall_time: clock.elapsed().as_secs_f64(),
    })
}

fn check_epsilon<T: Real>(epsilon: T) -> Result<()> {
    if !(epsilon >= T::zero()) || !epsilon.is_finite() {
        return Err(Error::Argument(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    Ok(())
}

/// Partitions of `n` into `parts` positive integers, nonincreasing, most
/// even first.
fn allocations(n: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, parts: usize, cap: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if n == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let hi = cap.min(n.saturating_sub(parts - 1));
        for v in (1..=hi).rev() {
            if v * parts < n {
                break;
            }
            prefix.push(v);
            rec(n - v, parts - 1, v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, parts, n, &mut Vec::new(), &mut out);
    out.sort_by_key(|a| (a[0], std::cmp::Reverse(a[a.len() - 1])));
    out
}

/// Memoized descents by mass fraction from a common normalized start.
struct ComponentSearch<'a, 'b, T: Real> {
    eval: &'a mut Evaluator<'b, T>,
    start: StarShape<T>,
    cfg: &'a OptimizerConfig,
    memo: BTreeMap<u64, (StarShape<T>, T, bool)>,
}

impl<T: Real> ComponentSearch<'_, '_, T> {
    fn component(&mut self, fraction: f64) -> Result<(StarShape<T>, T, bool)> {
        let key = fraction.to_bits();
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let d = descend(self.eval, &self.start, T::PI() * c::<T>(fraction), self.cfg)?;
        let e = d.energies[d.energies.len() - 1];
        let out = (d.shape, e, d.converged);
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    fn candidate(&mut self, fractions: &[f64]) -> Result<(Vec<StarShape<T>>, T, bool)> {
        let mut shapes = Vec::with_capacity(fractions.len());
        let mut total = T::zero();
        let mut converged = true;
        for &f in fractions {
            let (s, e, ok) = self.component(f)?;
            shapes.push(s);
            total += e;
            converged &= ok;
        }
        Ok((shapes, total, converged))
    }
}

/// Best configuration found for a fixed number of components.
struct Incumbent<T: Real> {
    fractions: Vec<f64>,
    shapes: Vec<StarShape<T>>,
    energy: T,
    converged: bool,
}

/// Searches allocations of mass π into exactly `parts` components.
fn best_for_count<T: Real>(
    search: &mut ComponentSearch<'_, '_, T>,
    parts: usize,
    history: &mut Vec<T>,
) -> Result<Incumbent<T>> {
    fn consider<T: Real>(
        search: &mut ComponentSearch<'_, '_, T>,
        fractions: Vec<f64>,
        best: &mut Option<Incumbent<T>>,
        history: &mut Vec<T>,
    ) -> Result<()> {
        let (shapes, energy, converged) = search.candidate(&fractions)?;
        if best.as_ref().map_or(true, |b| energy < b.energy) {
            if history.last().map_or(true, |&h| energy < h) {
                history.push(energy);
            }
            *best = Some(Incumbent {
                fractions,
                shapes,
                energy,
                converged,
            });
        }
        Ok(())
    }
    let n = search.cfg.mass_grid.max(parts);
    let mut best = None;
    for a in allocations(n, parts) {
        let fr = a.iter().map(|&v| v as f64 / n as f64).collect();
        consider(search, fr, &mut best, history)?;
    }
    let mut spacing = 1.0 / n as f64;
    for _ in 0..search.cfg.mass_refinements {
        if parts < 2 {
            break;
        }
        spacing *= 0.5;
        let center = best
            .as_ref()
            .expect("at least one allocation")
            .fractions
            .clone();
        for i in 0..parts {
            for j in 0..parts {
                if i == j || center[j] - spacing <= 0.0 {
                    continue;
                }
                let mut fr = center.clone();
                fr[i] += spacing;
                fr[j] -= spacing;
                fr.sort_by(|a, b| b.partial_cmp(a).expect("finite fractions"));
                consider(search, fr, &mut best, history)?;
            }
        }
    }
    Ok(best.expect("at least one allocation"))
}

/// Outcome of [`minimize_generalized`] with per-count energies.
struct Generalized<T: Real> {
    per_count: Vec<Incumbent<T>>,
    history: Vec<T>,
    evaluations: usize,
}

fn generalized_search<T: Real>(
    profile: &RadialProfile<T>,
    epsilon: T,
    h_max: usize,
    start: &StarShape<T>,
    cfg: &OptimizerConfig,
) -> Result<Generalized<T>> {
    let mut eval = Evaluator {
        profile,
        epsilon,
        nodes: cfg.descent_nodes,
        count: 0,
    };
    let mut history = Vec::new();
    let mut per_count = Vec::with_capacity(h_max);
    {
        let mut search = ComponentSearch {
            eval: &mut eval,
            start: project_volume(start, T::PI())?,
            cfg,
            memo: BTreeMap::new(),
        };
        for parts in 1..=h_max {
            per_count.push(best_for_count(&mut search, parts, &mut history)?);
        }
    }
    Ok(Generalized {
        per_count,
        history,
        evaluations: eval.count,
    })
}

/// Places components side by side, well separated, for display.
fn lay_out<T: Real>(shapes: &[StarShape<T>]) -> Vec<StarShape<T>> {
    let mut x = T::zero();
    let mut out = Vec::with_capacity(shapes.len());
    for (i, s) in shapes.iter().enumerate() {
        let r = s.max_radius_bound();
        if i > 0 {
            x += r;
        }
        out.push(s.with_center([x, T::zero()]));
        x += r * c::<T>(1.5);
    }
    out
}

/// Minimizes the generalized energy over up to `h_max` star components of
/// total area π, searching mass allocations on a refined simplex grid.
pub fn minimize_generalized<T: Real>(
    k: &KernelSpec<T>,
    epsilon: T,
    h_max: usize,
    cfg: &OptimizerConfig,
) -> Result<(ComponentList<T>, MinimizeTrace<T>)> {
    cfg.validate()?;
    check_epsilon(epsilon)?;
    if h_max == 0 {
        return Err(Error::Argument("h_max must be >= 1".into()));
    }
    generalized_from(k, epsilon, h_max, &StarShape::unit_disk(), cfg)
}

fn generalized_from<T: Real>(
    k: &KernelSpec<T>,
    epsilon: T,
    h_max: usize,
    start: &StarShape<T>,
    cfg: &OptimizerConfig,
) -> Result<(ComponentList<T>, MinimizeTrace<T>)> {
    let clock = Instant::now();
    let model = EnergyModel::new(k, cfg.quadrature)?;
    let g = generalized_search(model.profile(), epsilon, h_max, start, cfg)?;
    let best = g
        .per_count
        .iter()
        .min_by(|a, b| a.energy.partial_cmp(&b.energy).expect("finite energies"))
        .expect("h_max >= 1");
    let shapes = lay_out(&best.shapes);
    let list = ComponentList::new(shapes.iter().cloned().map(Shape::Star).collect())?;
    let energy = model
        .generalized(epsilon, &list)
        .map_err(context("final components"))?;
    let asymmetry = shapes
        .iter()
        .map(normalized_asymmetry)
        .collect::<Result<Vec<_>>>()?;
    let mut eval = Evaluator {
        profile: model.profile(),
        epsilon,
        nodes: cfg.descent_nodes,
        count: g.evaluations,
    };
    let locally_optimal = shapes.iter().all(|s| locally_optimal(&mut eval, s, cfg));
    let trace = MinimizeTrace {
        energies: g.history,
        iterations: Vec::new(),
        shapes,
        energy,
        asymmetry,
        converged: best.converged,
        locally_optimal,
        evaluations: eval.count,
        wall_time: clock.elapsed().as_secs_f64(),
    };
    Ok((list, trace))
}

/// Whether a sweep row was computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "message", rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Failed(String),
}

/// One ε of a sweep. Energies are from the fixed-node descent quadrature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub best_single_energy: f64,
    /// Best generalized energy over `1..=max_components` components.
    pub best_split_energy: f64,
    /// Best energy with at least two components, if searched.
    pub best_multi_energy: Option<f64>,
    pub n_components_chosen: usize,
    /// Largest asymmetry among the chosen components at area π.
    pub asymmetry: f64,
    /// Mass fractions of the chosen components.
    pub fractions: Vec<f64>,
    pub status: RowStatus,
}

/// Rows sorted by ε and the thresholds read off them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// First crossing of the multi-component and single energies, linearly
    /// interpolated between the bracketing rows.
    pub fission_threshold: Option<f64>,
    pub fission_bracket: Option<(f64, f64)>,
}

/// Runs the generalized search at each ε, warm starting each row from the
/// previous row's single-component minimizer.
pub fn epsilon_sweep<T: Real>(
    k: &KernelSpec<T>,
    eps_list: &[T],
    cfg: &OptimizerConfig,
) -> Result<SweepResult> {
    if eps_list.is_empty() {
        return Err(Error::Argument("epsilon list is empty".into()));
    }
    if eps_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Argument(
            "epsilon list must be strictly increasing".into(),
        ));
    }
    for &e in eps_list {
        check_epsilon(e)?;
    }
    let mut runner = SweepRunner::new(k, cfg)?;
    for &eps in eps_list {
        runner.step(eps)?;
    }
    Ok(runner.finish())
}

/// Row-by-row form of [`epsilon_sweep`], so a sweep can be checkpointed and
/// resumed from its rows and the current warm start.
#[derive(Clone, Debug)]
pub struct SweepRunner<T: Real> {
    profile: RadialProfile<T>,
    cfg: OptimizerConfig,
    warm: StarShape<T>,
    rows: Vec<SweepRow>,
}

impl<T: Real> SweepRunner<T> {
    pub fn new(k: &KernelSpec<T>, cfg: &OptimizerConfig) -> Result<Self> {
        Self::resume(k, cfg, Vec::new(), StarShape::unit_disk())
    }

    /// Continues after `rows`, which must be sorted by ε.
    pub fn resume(
        k: &KernelSpec<T>,
        cfg: &OptimizerConfig,
        rows: Vec<SweepRow>,
        warm: StarShape<T>,
    ) -> Result<Self> {
        cfg.validate()?;
        if rows.windows(2).any(|w| !(w[0].epsilon < w[1].epsilon)) {
            return Err(Error::Argument(
                "epsilon list must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            profile: RadialProfile::new(k)?,
            cfg: *cfg,
            warm,
            rows,
        })
    }

    /// Computes the row at `eps`; numerical failures become failed rows.
    pub fn step(&mut self, eps: T) -> Result<&SweepRow> {
        check_epsilon(eps)?;
        if let Some(last) = self.rows.last() {
            if !(eps.to_f64_lossy() > last.epsilon) {
                return Err(Error::Argument(
                    "epsilon list must be strictly increasing".into(),
                ));
            }
        }
        let row = match sweep_row(&self.profile, eps, &self.warm, &self.cfg) {
            Ok((row, single)) => {
                self.warm = single;
                row
            }
            Err(e) => SweepRow {
                epsilon: eps.to_f64_lossy(),
                best_single_energy: f64::NAN,
                best_split_energy: f64::NAN,
                best_multi_energy: None,
                n_components_chosen: 0,
                asymmetry: f64::NAN,
                fractions: Vec::new(),
                status: RowStatus::Failed(e.to_string()),
            },
        };
        self.rows.push(row);
        Ok(self.rows.last().expect("just pushed"))
    }

    /// Start of the next row: the last single-component minimizer at area π.
    pub fn warm_start(&self) -> &StarShape<T> {
        &self.warm
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn finish(self) -> SweepResult {
        let (fission_threshold, fission_bracket) = fission(&self.rows);
        SweepResult {
            rows: self.rows,
            fission_threshold,
            fission_bracket,
        }
    }
}

fn sweep_row<T: Real>(
    profile: &RadialProfile<T>,
    eps: T,
    warm: &StarShape<T>,
    cfg: &OptimizerConfig,
) -> Result<(SweepRow, StarShape<T>)> {
    let g = generalized_search(profile, eps, cfg.max_components, warm, cfg)?;
    let single = &g.per_count[0];
    let (chosen_count, chosen) = g
        .per_count
        .iter()
        .enumerate()
        .min_by(|a, b| {
            a.1.energy
                .partial_cmp(&b.1.energy)
                .expect("finite energies")
        })
        .expect("at least one count");
    let multi = g.per_count[1..]
        .iter()
        .map(|i| i.energy.to_f64_lossy())
        .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.min(e))));
    let mut asymmetry = 0.0f64;
    for s in &chosen.shapes {
        asymmetry = asymmetry.max(normalized_asymmetry(s)?.asymmetry.to_f64_lossy());
    }
    let row = SweepRow {
        epsilon: eps.to_f64_lossy(),
        best_single_energy: single.energy.to_f64_lossy(),
        best_split_energy: chosen.energy.to_f64_lossy(),
        best_multi_energy: multi,
        n_components_chosen: chosen_count + 1,
        asymmetry,
        fractions: chosen.fractions.clone(),
        status: RowStatus::Ok,
    };
    Ok((row, project_volume(&single.shapes[0], T::PI())?))
}

/// First sign change of `multi − single` along the computed rows, with
/// the bracketing ε values.
pub fn fission(rows: &[SweepRow]) -> (Option<f64>, Option<(f64, f64)>) {
    let gaps: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.status == RowStatus::Ok)
        .filter_map(|r| {
            r.best_multi_energy
                .map(|m| (r.epsilon, m - r.best_single_energy))
        })
        .collect();
    if let Some(&(e0, d0)) = gaps.first() {
        if d0 < 0.0 {
            return (Some(e0), Some((e0, e0)));
        }
    }
    for w in gaps.windows(2) {
        let ((e0, d0), (e1, d1)) = (w[0], w[1]);
        if d0 >= 0.0 && d1 < 0.0 {
            let t = d0 / (d0 - d1);
            return (Some(e0 + t * (e1 - e0)), Some((e0, e1)));
        }
    }
    (None, None)
}

/// Desk-scale test that the unit disk minimizes `P + ε ℜ` at area π.
///
/// Checks, on `n_perturbations` random starts: the disk has lower energy
/// than each start; descent from each start returns within
/// `cfg.asymmetry_tol` of a disk; and the final asymmetry obeys
/// `|Ω Δ B|² ≤ ε ℜ(B) / C`, where `C` is the smallest isoperimetric deficit
/// ratio `(P(s) − P(B)) / |s Δ B|²` measured on the starts. Hypotheses on
/// the kernel that fail are reported as witnesses.
pub fn ball_minimality_test<T: Real>(
    k: &KernelSpec<T>,
    epsilon: T,
    n_perturbations: usize,
    cfg: &OptimizerConfig,
) -> Result<CheckReport> {
    cfg.validate()?;
    check_epsilon(epsilon)?;
    if n_perturbations == 0 {
        return Err(Error::Argument("need at least one perturbation".into()));
    }
    let mut report = CheckReport::default();
    hypotheses(k, cfg.seed, &mut report)?;
    let model = EnergyModel::new(k, cfg.quadrature)?;
    let disk = StarShape::unit_disk();
    let ball = model.energy(epsilon, &Shape::Star(disk.clone()))?;
    let ball_total = ball.total.to_f64_lossy();
    let ball_perimeter = ball.perimeter.to_f64_lossy();
    let ball_riesz = ball.riesz.to_f64_lossy();

    let mut qii = f64::INFINITY;
    let mut finals = Vec::with_capacity(n_perturbations);
    let mut min_gap = f64::INFINITY;
    for i in 0..n_perturbations {
        let start = random_start::<T>(
            cfg.seed.wrapping_add(i as u64),
            cfg.n_modes,
            cfg.perturbation_amplitude,
        )?;
        let e = model
            .energy(epsilon, &Shape::Star(start.clone()))
            .map_err(context("random start"))?;
        let gap = e.total.to_f64_lossy() - ball_total;
        min_gap = min_gap.min(gap);
        if gap < 0.0 {
            report.witnesses.push(Witness {
                label: format!("start {i} below the disk"),
                values: vec![i as f64, ball_total, e.total.to_f64_lossy()],
            });
        }
        let asym = fraenkel_center(&start)?.asymmetry.to_f64_lossy();
        if asym > 0.0 {
            qii = qii.min((e.perimeter.to_f64_lossy() - ball_perimeter) / (asym * asym));
        }
        let trace = minimize_single(k, epsilon, &start, cfg).map_err(context("descent"))?;
        let final_asym = trace.max_asymmetry().to_f64_lossy();
        if final_asym >= cfg.asymmetry_tol {
            report.witnesses.push(Witness {
                label: format!("start {i} did not return to a disk"),
                values: vec![i as f64, final_asym],
            });
        }
        finals.push(final_asym);
        report.samples_used += 1;
    }
    let bound = if qii.is_finite() && qii > 0.0 {
        (epsilon.to_f64_lossy() * ball_riesz / qii).sqrt()
    } else {
        report
            .warnings
            .push("no usable deficit ratio; asymmetry bound skipped".into());
        f64::INFINITY
    };
    for (i, &a) in finals.iter().enumerate() {
        if a > bound {
            report.witnesses.push(Witness {
                label: format!("start {i} exceeds the asymmetry bound"),
                values: vec![i as f64, a, bound],
            });
        }
    }
    let max_final = finals.iter().fold(0.0f64, |m, &a| m.max(a));
    report.extremal_ratio = if bound.is_finite() {
        max_final / bound
    } else {
        0.0
    };
    report.metrics.insert("ball_energy".into(), ball_total);
    report.metrics.insert("ball_riesz".into(), ball_riesz);
    report.metrics.insert("min_energy_gap".into(), min_gap);
    report.metrics.insert("qii_constant".into(), qii);
    report.metrics.insert("asymmetry_bound".into(), bound);
    report
        .metrics
        .insert("max_final_asymmetry".into(), max_final);
    Ok(report.finish())
}

/// Radial, decreasing, positive definite, and a Lipschitz ball potential.
fn hypotheses<T: Real>(k: &KernelSpec<T>, seed: u64, report: &mut CheckReport) -> Result<()> {
    let mut fail = |label: &str| {
        report.witnesses.push(Witness {
            label: format!("hypothesis: {label}"),
            values: Vec::new(),
        })
    };
    let lipschitz = k.lipschitz_integral()?.is_finite();
    if !lipschitz {
        fail("lipschitz integral diverges");
    }
    let decreasing = check_decreasing(k, &default_decreasing_grid())?.passed;
    if !decreasing {
        fail("kernel is not decreasing");
    }
    let mut pairs = RandomRasterPairs::new(c::<T>(1.0 / 16.0), 24, seed)?;
    let pd = check_pd_inequality(k, &mut pairs, 50, PdOptions::default())?.passed;
    if !pd {
        fail("positive definiteness fails on random rasters");
    }
    report.flags.insert("lipschitz".into(), lipschitz);
    report.flags.insert("decreasing".into(), decreasing);
    report.flags.insert("positive_definite".into(), pd);
    Ok(())
}

#[cfg(test)]
mod tests;
