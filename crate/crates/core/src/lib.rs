//! Numerical laboratory for filiform nilflows.
//!
//! The crate builds, from the ground up, the computable objects attached to a
//! `k`-step filiform nilflow: the nilpotent Lie algebras and their bases
//! ([`algebra`]), the skew-shift return map on the toral section together
//! with Weyl/ergodic sums ([`dynamics`]), continued fractions and Diophantine
//! exponent estimation ([`diophantine`]), the renormalization diagonal flow
//! on lattices with exact shortest vectors ([`lattice`]), the irreducible
//! representation models with their distribution and Green-operator norms
//! ([`representation`]), and an experiment harness that sweeps Weyl sums and
//! fits power-saving exponents ([`harness`]).
//!
//! All circle values are fractions of a turn in `[0, 1)`; the character is
//! `e(s) = exp(2 pi i s)`.

pub mod algebra;
pub mod diophantine;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod quadrature;
pub mod representation;
mod twofloat;

pub use error::{Error, Result};
pub use lattice::ScalingExponents;
