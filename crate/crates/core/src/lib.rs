//! Rotating equilibria of a planar, self-interacting incompressible fluid
//! body perturbed by a small point mass.
//!
//! The fluid domain is parameterized as the image of the unit disk under
//! `f(z) = z + h(z)`. The crate provides the unperturbed state, the explicit
//! linearization at the disk, its inverse, and a frozen-Jacobian
//! continuation in the particle mass.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cheb;
pub mod coeffs;
pub mod error;
pub mod kernel;
pub mod linop;
pub mod potential;
pub mod quad;
pub mod radial_ode;
pub mod residual;
pub mod spectral;
pub mod verify;

mod par;

pub use error::{Error, Result};
pub use kernel::VorticityProfile;
pub use potential::{BaseState, InteractionCase};
pub use spectral::ShapeCoeffs;

/// Version tag written into every JSON document produced by the crate.
pub const SCHEMA_VERSION: u32 = 1;
