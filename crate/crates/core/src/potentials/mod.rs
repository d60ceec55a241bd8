//! Parabolic harmonic analysis: the fractional heat kernel, Riesz
//! potentials, maximal functions, Morrey/Campanato norms and the
//! Hedberg and Poincaré inequalities on space–time lattices.

mod kernel;
mod lattice;
pub mod quadrature;
pub mod suites;

use thiserror::Error;

pub use kernel::{
    kernel_bound_check, profile_quadrature, HeatKernel, KernelBoundReport, KernelBoundSpec, KernelBounds, MIN_ORDER,
    TABLE_RADIUS,
};
pub use lattice::{
    cylinder_sup, cylinder_volume, delta_metric, dyadic_radii, gather, hedberg_check, hedberg_constant, maximal_operator,
    morrey_campanato_norms, parabolic_dimension, poincare_check, riesz_holder, riesz_integrability, riesz_potential,
    singular_cell_integral, CylinderNorm, CylinderOptions, CylinderStencil, CylinderSup, HedbergReport, HolderReport,
    IntegrabilityReport, ParabolicPoint, PoincareReport, SampledSpaceTimeFunction,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialsError {
    #[error("kernel order a = {0} outside the supported range [0.25, 1]")]
    UnsupportedOrder(f64),
    #[error("quadrature did not converge (error estimate {0:e})")]
    QuadratureFailure(f64),
    #[error("beta = {0} outside (0, 2 + 2a)")]
    UnsupportedBeta(f64),
    #[error("unsupported parameters: {0}")]
    UnsupportedParameters(String),
    #[error("no cylinder holds at least {0} samples")]
    InsufficientResolution(usize),
    #[error("snapshots differ in grid size or component count")]
    ShapeMismatch,
}
