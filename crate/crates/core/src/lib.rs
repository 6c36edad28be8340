//! Exact computer algebra for the constructive side of logarithmic deformation
//! theory.
//!
//! Everything is computed over the rationals with no floating point anywhere.
//! The building blocks are:
//!
//! * [`exactalg`] — sparse Laurent polynomials over Artin bases `Q[t]/(t^{k+1})`,
//!   finitely presented chart rings with confluent monomial rewriting, and ring
//!   homomorphisms between them.
//! * [`apl`] — polynomial differential forms on standard simplices with face
//!   maps, differential, wedge, a face-extension solver and exact integration.
//! * [`gerst`] — polyvector fields on affine log charts as Gerstenhaber
//!   algebras (wedge and the negated Schouten–Nijenhuis bracket).
//! * [`logdef`] — log derivations and infinitesimal automorphisms together
//!   with the exp/log correspondence, Baker–Campbell–Hausdorff products and
//!   gauge transforms.
//! * [`tw`] — Thom–Whitney elements over the nerve of a finite cover, with the
//!   bigraded Gerstenhaber operations, base change and H⁰ extraction.
//! * [`pdgla`] — truncated predifferential graded Lie algebras, Maurer–Cartan
//!   residuals and gauge actions.
//! * [`curve`] — a builder and golden-value regression suite for a log smooth
//!   curve made of three pairwise intersecting lines.

pub mod apl;
pub mod check;
pub mod curve;
pub mod error;
pub mod exactalg;
pub mod gerst;
pub mod json;
pub mod linalg;
pub mod logdef;
pub mod pdgla;
pub mod sample;
pub mod sign;
pub mod toy;
pub mod tw;

pub use error::{Error, Result};

/// Exact rational scalar used everywhere in this crate.
pub type Q = num_rational::BigRational;

/// Rational from an integer.
pub fn qi(n: i64) -> Q {
    Q::from_integer(num_bigint::BigInt::from(n))
}

/// Rational from numerator and denominator.
pub fn qr(n: i64, d: i64) -> Q {
    Q::new(num_bigint::BigInt::from(n), num_bigint::BigInt::from(d))
}
