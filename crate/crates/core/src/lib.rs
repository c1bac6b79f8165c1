//! Numerical laboratory for k-harmonic curves into space forms.
//!
//! A curve is sampled on a uniform grid over a circle or an interval and
//! mapped into a sphere, a hyperbolic space or a Euclidean space (or a
//! product of those). The crate evaluates the Euler-Lagrange operators of
//! the k-energies in several independent ways, runs projected gradient flows
//! of the energies, and assembles the second variation at critical curves.
//!
//! All numerical routines are generic over [`scalar::Real`]; verification
//! runs in double-double precision ([`dd::Dd`]) because eighth derivatives
//! computed from `f64` samples are dominated by rounding.

pub mod cli;
pub mod dd;
pub mod error;
pub mod geometry;
pub mod parametric;
pub mod product;
pub mod random;
pub mod residuals;
pub mod scalar;
pub mod variational;

pub use dd::Dd;
pub use error::{Error, Result};
pub use scalar::Real;
