//! Ternary Cahn-Hilliard phase-field models on periodic grids.
//!
//! Two models of a three-component mixture are implemented:
//!
//! * the *degenerate* model evolves two independent labels `(phi, psi)` with
//!   surface-tension coefficients interpolated between the pure phases;
//! * the *non-degenerate* model evolves concentrations `(c, d)` with the
//!   third `1 - c - d` enforced through a pointwise Lagrange multiplier.
//!
//! Both are discretised pseudo-spectrally and advanced with a stabilised
//! semi-implicit scheme whose chemical potentials are the exact first
//! variation of the discrete energies.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix `f64`, which every documented tolerance assumes.

pub mod coefficients;
pub mod config;
pub mod dynamics;
pub mod energy;
pub mod experiments;
pub mod grid;
pub mod params;
pub mod scalar;
pub mod snapshot;

pub use scalar::Real;

pub type Grid = grid::Grid2D<f64>;
pub type Field = grid::ScalarField<f64>;
pub type Spectral = grid::Spectral<f64>;
pub type Tensions = params::SurfaceTensions<f64>;
pub type Spec = params::ModelSpec<f64>;
pub type Numerics = params::NumericalParams<f64>;
pub type Simulation = dynamics::Simulation<f64>;
pub type State = dynamics::SimState<f64>;
