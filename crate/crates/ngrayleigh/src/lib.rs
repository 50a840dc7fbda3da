//! Fundamental frequency solutions of the two-dimensional nonlinear
//! Schrödinger equation with a harmonic trap and combined power
//! nonlinearities,
//!
//! ```text
//! i ψ_t = -Δψ + |x|² ψ - μ |ψ|^{p-2} ψ + ν |ψ|^{q-2} ψ,   2 < p < q,
//! ```
//!
//! computed by maximising the nonlinear generalized Rayleigh quotient at a
//! prescribed action level, then checked against identities, independent
//! fixed-point solvers and direct time propagation.

pub mod atlas;
pub mod error;
pub mod functionals;
pub mod linalg;
pub mod propagator;
pub mod quadrature;
pub mod rayleigh;
pub mod solver;

pub use error::{Error, Result};

// The guide's chapters, compiled as doctests.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/overview.md")]
pub mod chapter1 {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/quotients.md")]
pub mod chapter2 {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/solving.md")]
pub mod chapter3 {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/atlas.md")]
pub mod chapter4 {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/propagation.md")]
pub mod chapter5 {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub mod chapter6 {}
