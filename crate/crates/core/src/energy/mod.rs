//! Perimeter plus nonlocal interaction energies.

mod cells;
mod cut;
mod star;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec, RadialProfile};
use crate::real::Real;
use crate::shapes::{RasterSet, StarShape, DEFAULT_PITCH, PERIMETER_NODES};

pub(crate) use cells::origin_cell_average;
pub use cells::{cell_weight, raster_interaction, square_self_interaction, CellWeights};
pub use cut::{cut_and_paste, CutOptions, CutOutcome, CutReport, NoCutReport};
pub use star::{
    cross_interaction, cross_interaction_fixed, self_interaction, self_interaction_fixed,
    Refinement,
};

/// Numerical resolution of energy evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSettings {
    /// Relative agreement required between successive node doublings.
    pub rel_tol: f64,
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub perimeter_nodes: usize,
    /// Pitch used when a star shape meets a raster or another star shape
    /// must be compared cell by cell.
    pub pitch: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            min_nodes: 128,
            max_nodes: 8192,
            perimeter_nodes: PERIMETER_NODES,
            pitch: DEFAULT_PITCH,
        }
    }
}

impl QuadratureSettings {
    pub fn refinement(&self) -> Refinement {
        Refinement {
            rel_tol: self.rel_tol,
            min_nodes: self.min_nodes,
            max_nodes: self.max_nodes,
        }
    }
}

/// A set in either representation.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape<T: Real> {
    Star(StarShape<T>),
    Raster(RasterSet<T>),
}

impl<T: Real> Shape<T> {
    pub fn area(&self) -> T {
        match self {
            Shape::Star(s) => s.area(),
            Shape::Raster(r) => r.area(),
        }
    }

    pub fn perimeter(&self, settings: &QuadratureSettings) -> T {
        match self {
            Shape::Star(s) => s.perimeter_with(settings.perimeter_nodes),
            Shape::Raster(r) => r.perimeter(),
        }
    }
}

impl<T: Real> From<StarShape<T>> for Shape<T> {
    fn from(s: StarShape<T>) -> Self {
        Shape::Star(s)
    }
}

impl<T: Real> From<RasterSet<T>> for Shape<T> {
    fn from(r: RasterSet<T>) -> Self {
        Shape::Raster(r)
    }
}

/// Pieces of a set that are declared infinitely far from each other.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentList<T: Real> {
    components: Vec<Shape<T>>,
}

impl<T: Real> ComponentList<T> {
    pub fn new(components: Vec<Shape<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Argument("component list is empty".into()));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Shape<T>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_area(&self) -> T {
        self.components.iter().map(Shape::area).sum()
    }
}

/// Perimeter, interaction and total energy of a set or component list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown<T> {
    pub perimeter: T,
    pub riesz: T,
    pub epsilon: T,
    pub total: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_component: Option<Vec<(T, T)>>,
}

impl<T: Real> EnergyBreakdown<T> {
    pub fn new(perimeter: T, riesz: T, epsilon: T) -> Self {
        Self {
            perimeter,
            riesz,
            epsilon,
            total: perimeter + epsilon * riesz,
            per_component: None,
        }
    }

    pub fn n_components(&self) -> usize {
        self.per_component.as_ref().map_or(1, Vec::len)
    }

    pub fn row(&self) -> EnergyRow<T> {
        EnergyRow {
            epsilon: self.epsilon,
            perimeter: self.perimeter,
            riesz: self.riesz,
            total: self.total,
            n_components: self.n_components(),
        }
    }
}

/// One CSV line of an energy table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow<T> {
    pub epsilon: T,
    pub perimeter: T,
    pub riesz: T,
    pub total: T,
    pub n_components: usize,
}

/// Kernel prepared once together with quadrature settings.
#[derive(Clone, Debug)]
pub struct EnergyModel<T: Real> {
    profile: RadialProfile<T>,
    settings: QuadratureSettings,
}

impl<T: Real> EnergyModel<T> {
    pub fn new(kernel: &KernelSpec<T>, settings: QuadratureSettings) -> Result<Self> {
        if kernel.dimension != 2 {
            return Err(Error::Argument(format!(
                "set energies are planar; kernel has dimension {}",
                kernel.dimension
            )));
        }
        Ok(Self {
            profile: RadialProfile::new(kernel)?,
            settings,
        })
    }

    pub fn profile(&self) -> &RadialProfile<T> {
        &self.profile
    }

    pub fn settings(&self) -> &QuadratureSettings {
        &self.settings
    }

    pub fn kernel(&self) -> &KernelSpec<T> {
        self.profile.kernel()
    }

    /// `ℜ(f, g)`.
    pub fn interaction(&self, f: &Shape<T>, g: &Shape<T>) -> Result<T> {
        let pitch = |r: &RasterSet<T>| r.pitch();
        match (f, g) {
            (Shape::Star(a), Shape::Star(b)) if a == b => self.star_self(a),
            (Shape::Star(a), Shape::Star(b)) => {
                cross_interaction(&self.profile, a, b, self.settings.refinement())
            }
            (Shape::Raster(a), Shape::Raster(b)) => raster_interaction(&self.profile, a, b),
            (Shape::Star(a), Shape::Raster(b)) => {
                raster_interaction(&self.profile, &a.rasterize(pitch(b))?, b)
            }
            (Shape::Raster(a), Shape::Star(b)) => {
                raster_interaction(&self.profile, a, &b.rasterize(pitch(a))?)
            }
        }
    }

    /// `ℜ(f) = ℜ(f, f)`.
    pub fn self_interaction(&self, f: &Shape<T>) -> Result<T> {
        match f {
            Shape::Star(s) => self.star_self(s),
            Shape::Raster(r) => raster_interaction(&self.profile, r, r),
        }
    }

    fn star_self(&self, s: &StarShape<T>) -> Result<T> {
        self_interaction(&self.profile, s, self.settings.refinement())
    }

    pub fn energy(&self, epsilon: T, f: &Shape<T>) -> Result<EnergyBreakdown<T>> {
        check_epsilon(epsilon)?;
        // ℜ is reported even at ε = 0 so that sweeps can reuse it.
        let riesz = self.self_interaction(f)?;
        Ok(EnergyBreakdown::new(
            f.perimeter(&self.settings),
            riesz,
            epsilon,
        ))
    }

    /// Sum of component energies with no cross terms.
    pub fn generalized(&self, epsilon: T, c: &ComponentList<T>) -> Result<EnergyBreakdown<T>> {
        check_epsilon(epsilon)?;
        let mut per = Vec::with_capacity(c.len());
        for comp in c.components() {
            per.push((comp.perimeter(&self.settings), self.self_interaction(comp)?));
        }
        let perimeter = per.iter().map(|p| p.0).sum();
        let riesz = per.iter().map(|p| p.1).sum();
        let mut out = EnergyBreakdown::new(perimeter, riesz, epsilon);
        out.per_component = Some(per);
        Ok(out)
    }

    /// Energy of the union of the components at their actual positions,
    /// including cross interactions. Components are assumed disjoint.
    pub fn union(&self, epsilon: T, c: &ComponentList<T>) -> Result<EnergyBreakdown<T>> {
        let mut out = self.generalized(epsilon, c)?;
        let comps = c.components();
        let mut cross = T::zero();
        for i in 0..comps.len() {
            for j in i + 1..comps.len() {
                cross += self.interaction(&comps[i], &comps[j])?;
            }
        }
        out.riesz += T::two() * cross;
        out.total = out.perimeter + epsilon * out.riesz;
        Ok(out)
    }
}

fn check_epsilon<T: Real>(epsilon: T) -> Result<()> {
    if !(epsilon >= T::zero()) || !epsilon.is_finite() {
        return Err(Error::Argument(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    Ok(())
}

/// `ℜ(f, g)` with default settings.
pub fn riesz_interaction<T: Real>(k: &KernelSpec<T>, f: &Shape<T>, g: &Shape<T>) -> Result<T> {
    EnergyModel::new(k, QuadratureSettings::default())?.interaction(f, g)
}

/// `P(f) + ε ℜ(f)` with default settings.
pub fn gamow_energy<T: Real>(
    k: &KernelSpec<T>,
    epsilon: T,
    f: &Shape<T>,
) -> Result<EnergyBreakdown<T>> {
    EnergyModel::new(k, QuadratureSettings::default())?.energy(epsilon, f)
}

/// `Σ_i P(Ω_i) + ε ℜ(Ω_i)` with default settings.
pub fn generalized_energy<T: Real>(
    k: &KernelSpec<T>,
    epsilon: T,
    c: &ComponentList<T>,
) -> Result<EnergyBreakdown<T>> {
    EnergyModel::new(k, QuadratureSettings::default())?.generalized(epsilon, c)
}

/// Exponent of a homogeneous kernel: `g(mr) = m^α g(r)`.
fn homogeneity<T: Real>(k: &KernelSpec<T>) -> Result<T> {
    match k.family {
        KernelFamily::Power { alpha } => Ok(alpha),
        KernelFamily::Constant => Ok(T::zero()),
        _ => Err(Error::Precondition(format!(
            "scaling identity needs a homogeneous kernel, got {k}"
        ))),
    }
}

/// `|𝔉(mΩ) − m (P(Ω) + m^(3+α) ℜ(Ω))|` for a homogeneous kernel, with both
/// sides evaluated independently.
pub fn scaling_residual<T: Real>(k: &KernelSpec<T>, s: &StarShape<T>, m: T) -> Result<T> {
    scaling_residual_with(k, s, m, QuadratureSettings::default())
}

pub fn scaling_residual_with<T: Real>(
    k: &KernelSpec<T>,
    s: &StarShape<T>,
    m: T,
    settings: QuadratureSettings,
) -> Result<T> {
    let alpha = homogeneity(k)?;
    if !(m > T::zero()) {
        return Err(Error::Argument(format!("scale must be positive, got {m}")));
    }
    let model = EnergyModel::new(k, settings)?;
    let scaled = Shape::Star(s.scale(m)?);
    let lhs = model.energy(T::one(), &scaled)?.total;
    let base = model.energy(T::one(), &Shape::Star(s.clone()))?;
    let n = T::two();
    let rhs = m.powf(n - T::one()) * (base.perimeter + m.powf(n + T::one() + alpha) * base.riesz);
    Ok((lhs - rhs).abs())
}
