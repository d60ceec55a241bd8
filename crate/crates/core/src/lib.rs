//! Pseudo-spectral solver and analysis toolkit for the generalized surface
//! quasi-geostrophic equation coupled to a nematic director field on the
//! periodic square `[0, 2π)²`.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar type for everyday use.

pub mod dynamics;
pub mod energetics;
pub mod fields;
pub mod io;
pub mod potentials;
pub mod scalar;
pub mod spectral;

pub use scalar::Real;

pub type Grid = spectral::SpectralGrid<f64>;
pub type Field = spectral::SpectralField<f64>;
pub type Director = fields::DirectorField<f64>;
pub type Params = dynamics::ModelParams<f64>;
pub type State = dynamics::SimState<f64>;
pub type Lattice = potentials::SampledSpaceTimeFunction<f64>;

pub type Grid32 = spectral::SpectralGrid<f32>;
pub type Field32 = spectral::SpectralField<f32>;
pub type Director32 = fields::DirectorField<f32>;
pub type Params32 = dynamics::ModelParams<f32>;
pub type State32 = dynamics::SimState<f32>;
