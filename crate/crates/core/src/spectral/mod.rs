//! Fourier representation on the symmetry-extended periodic box.

mod domain;
mod field;
mod ops;

pub use domain::{eig_lambda1, BoundaryCondition, DomainSpec, Grid};
pub use field::{Parity, ScalarField, SpectralField, VelocityField, ZERO};
pub use ops::{
    inner_l2, laplacian_apply, laplacian_apply_velocity, leray_in_place, leray_project, norm_a0,
    norm_h1_seminorm, norm_h2, norm_l2, norm_v0, norm_v0_sq, norm_v1, random_scalar,
    random_velocity, symmetry_project, symmetry_project_as, Operator, SpectralNorms,
};
