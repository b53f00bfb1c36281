//! Rayleigh-Benard convection on a stress-free strip, velocity-only nudging,
//! the determining map and its scalar reduction, and an audit of the explicit
//! parameter conditions under which the theory applies.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod bilinear;
pub mod determining;
pub mod error;
pub mod interp;
pub mod io;
pub mod nudging;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use rustfft::num_complex::Complex64;
pub use spectral::{DomainSpec, Parity, ScalarField, SpectralField, VelocityField};
