//! Biconformal deformations of Euclidean `R^4` over the orthogonal projection
//! `(x1, x2, x3, x4) -> (x1, x2)`.
//!
//! The deformed metric is
//!
//! ```text
//! g = (dx1^2 + dx2^2) / sigma^2 + (dx3^2 + dx4^2) / rho^2
//! ```
//!
//! for positive functions `sigma` and `rho`. This crate provides:
//!
//! - [`fields`]: scalar fields on `R^4` with exact first and second partials,
//!   built from a small expression language or from ODE-backed profiles.
//! - [`curvature`]: a brute-force finite-difference curvature engine that works
//!   for any metric field and serves as the arbiter for every closed form.
//! - [`biconformal`]: closed-form Ricci components of the deformed metric in the
//!   adapted orthonormal frame, the transformation laws and the deformed Laplacian.
//! - [`einstein`]: the Einstein systems (general, warped product and single
//!   parameter) together with the ODE-generated solution families.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod biconformal;
pub mod curvature;
pub mod einstein;
pub mod fields;
mod linalg;
mod math;

pub use biconformal::{DeformationPair, FrameRicci};
pub use curvature::{CurvatureError, CurvatureOracle, FdSteps, MetricField};
pub use fields::{Expr, FieldError, Jet2, ParseError, Point, ScalarField};
