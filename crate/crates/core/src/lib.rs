//! Cone-manifold deformations obtained by Dehn surgery on the Whitehead link
//! complement, computed at desk scale.
//!
//! The pipeline runs bottom-up:
//!
//! * [`jets`]: truncated power series with caller-chosen branches,
//! * [`gluing`]: the shape variety of the four-tetrahedron triangulation,
//! * [`holonomy`]: the explicit SL(2,C) family and its trace identities,
//! * [`curve`]: Taylor coefficients of geometric curves `l(m)`,
//! * [`surgery`]: cone-angle filling, closed-form θ-expansions, filled curves,
//! * [`tube`]: maximal tube radius, core length and the `μ̂²` expansion.
//!
//! [`verify`] bundles the structural invariants into a reproducible suite.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod curve;
pub mod error;
pub mod gluing;
pub mod holonomy;
pub mod jets;
pub mod parallel;
pub mod surgery;
pub mod tolerance;
pub mod tube;
pub mod verify;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};

/// `(1 + i)/2`, the common shape of all four tetrahedra at the complete structure.
pub const BASE_SHAPE: C64 = C64::new(0.5, 0.5);
