//! Discretized function-space toolkit.
//!
//! Functions on ℝⁿ (n ≤ 3) are sampled on uniform grids and treated as exact
//! step functions. On top of that representation the crate provides
//! nonincreasing rearrangements, Lebesgue/Lorentz/mixed/iterated-Lorentz
//! norms, directional differences and Besov-type seminorms, one-dimensional
//! Hardy-type integral checks, Fourier-side functionals (Riesz and Poisson
//! multipliers, maximal functions, slab suprema, spherical and cubic shell
//! sums), and a registry of inequalities that can be run over a seeded
//! corpus with empirical-constant and refinement-stability reports.

pub mod error;
pub mod fourier;
pub mod gridfn;
pub mod hardyops;
pub mod norms;
pub mod quad;
pub mod rearrange;
pub mod smoothness;
pub mod verify;

pub use error::{Error, Result};
pub use gridfn::{Family, FamilySpec, GridFunction, GridSpec};
pub use norms::NormSpec;
pub use rearrange::{DecreasingProfile, IteratedProfile};

/// Version tag written into every file format produced by the crate.
pub const FORMAT_VERSION: u32 = 1;
