#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Hard-edge statistics of the Laguerre β ensemble.
//!
//! Gap probabilities, smallest-eigenvalue densities and spectral densities
//! near the hard edge, with their leading finite-N corrections, computed along
//! several independent routes (Fredholm determinants, Painlevé ODEs, torus
//! integrals, polynomial recurrences) plus a Monte Carlo harness.

pub mod bigfloat;
pub mod error;
pub mod scalar;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::Real;
pub mod exactseries;
pub mod fredholm;
pub mod kernels;
pub mod linalg;
mod ode;
pub mod painleve;
pub mod quadrature;
pub mod recurrence;
pub mod sampler;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type EnsembleParams64 = kernels::EnsembleParams<f64>;
pub type EnsembleParams32 = kernels::EnsembleParams<f32>;
pub type BesselFamilyKernel64 = kernels::BesselFamilyKernel<f64>;
pub type FiniteLaguerreKernel64 = kernels::FiniteLaguerreKernel<f64>;
pub type QuadratureRule64 = quadrature::QuadratureRule<f64>;
pub type GapCorrection64 = fredholm::GapCorrection<f64>;
