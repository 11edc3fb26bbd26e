//! Exact-arithmetic HKZ lattice reduction and orthogonality-defect bounds.
//!
//! Lattices are represented by rational Gram matrices. The crate provides
//! exact Gram–Schmidt data, Fincke–Pohst shortest-vector enumeration, HKZ
//! reduction with certificates, successive minima, the classical and the
//! sharpened defect bounds for HKZ bases, a grid re-verification of the
//! rank-3 case analysis, and seeded random-lattice experiments.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod proof;
pub mod rational;
pub mod reduction;

pub use error::{Error, Result};
pub use lattice::{a2_gram, extremal_gram, GramMatrix, GsoData, Unimodular, VectorBasis};
pub use rational::Rat;
