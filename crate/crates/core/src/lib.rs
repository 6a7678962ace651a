//! Perimeter plus nonlocal interaction energies of planar sets.
//!
//! The crate evaluates `𝔉_ε(Ω) = P(Ω) + ε ℜ(Ω)` with
//! `ℜ(Ω) = ∫_Ω ∫_Ω g(|x − y|) dx dy` for radial kernels `g`, checks kernel
//! hypotheses numerically, constructs the cut and paste competitor on
//! rasters, verifies the lens inequality and the minimal-curve
//! configurations, and minimizes the energy over star shapes.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`.
//!
//! ```
//! use gamow::{Kernel, Star, Energy};
//! use gamow::energy::{gamow_energy, Shape};
//!
//! let k = Kernel::constant();
//! let e: Energy = gamow_energy(&k, 1.0, &Shape::Star(Star::unit_disk())).unwrap();
//! let pi = std::f64::consts::PI;
//! assert!((e.total - (2.0 * pi + pi * pi)).abs() < 1e-9);
//! ```

pub mod energy;
pub mod error;
pub mod kernel;
pub mod lens;
pub mod minimize;
pub mod quad;
pub mod real;
pub mod shapes;

pub use error::{Error, Result};
pub use real::Real;

pub type Kernel = kernel::KernelSpec<f64>;
pub type Profile = kernel::RadialProfile<f64>;
pub type Star = shapes::StarShape<f64>;
pub type Raster = shapes::RasterSet<f64>;
pub type Asymmetry = shapes::AsymmetryReport<f64>;
pub type Components = energy::ComponentList<f64>;
pub type Energy = energy::EnergyBreakdown<f64>;
pub type Model = energy::EnergyModel<f64>;
pub type Cut = energy::CutOutcome<f64>;
pub type Lens = lens::LensState<f64>;
pub type MinCurve = lens::MinCurveResult<f64>;
pub type Trace = minimize::MinimizeTrace<f64>;
