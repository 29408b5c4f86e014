//! Exact rational machinery for surfaces described by their negative curves.
//!
//! Given the intersection matrix of a set of curves on a projective surface,
//! this crate computes the effective and nef cones, the fibrations (nef
//! classes of self-intersection zero), all minimal models obtainable by
//! contracting negative-definite curve configurations, and the singularities
//! those contractions produce. A separate layer enumerates which baskets of
//! quotient singularities are numerically admissible on such models, using
//! the orbifold Bogomolov-Miyaoka-Yau inequality, determinant squareness and
//! p-adic lattice-embedding obstructions as filters.
//!
//! Everything is computed over exact rationals; there is no floating point
//! anywhere in the crate.

pub mod baskets;
pub mod cones;
pub mod linalg;
pub mod models;
pub mod num;
pub mod qforms;
pub mod report;
pub mod sing;
pub mod surface;

pub use num::Rat;
