//! Explicit harmonic and wave maps between pseudo-Riemannian surfaces.
//!
//! Targets are warped products `A(R) dR^2 - del2 B(R) dS^2`. A traveling-frame
//! ansatz turns the harmonic map system into the autonomous ODE
//! `R'(t)^2 = Phi(R)` plus a quadrature for `H(t)`; this crate builds those
//! maps numerically, evaluates the known closed-form families, and checks
//! every result against the Euler-Lagrange equations directly.
//!
//! Modules:
//! - [`metrics`]: signatures, radial profiles, the metric catalog, curvature.
//! - [`reduction`]: coefficients, `Phi`, `H'`, turning points, first integrals.
//! - [`integrator`]: fixed-step integration of `R`, quadrature for `H`, map assembly.
//! - [`closed_forms`]: the ellipsoid, hyperboloid and mixed-signature families.
//! - [`verifier`]: Euler-Lagrange and first-integral residuals, energy, wave evolution.
//! - [`cli`]: configuration, export and the `harmap` command.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closed_forms;
pub mod error;
pub mod field;
pub mod integrator;
pub mod metrics;
pub mod reduction;
pub mod verifier;

pub use error::{Error, ErrorKind, Result};
