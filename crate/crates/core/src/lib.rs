//! Exact Morita reduction of skew group algebras of quivers.
//!
//! Given a quiver Q, a finite group G acting on Q, and a choice of
//! irreducible representations of the vertex stabilizers, this crate computes
//! the reduced quiver Q_G whose path algebra is Morita equivalent to the skew
//! group algebra kQ∗G, and rewrites elements of the reduced idempotent corner
//! ẽ·(kQ∗G)·ẽ, in particular group-invariant potentials, as exact linear
//! combinations of paths in Q_G.
//!
//! All arithmetic is exact over cyclotomic number fields ℚ(ζ_n); there is no
//! floating point anywhere in the pipeline.

pub mod cyclotomic;
pub mod error;
pub mod group;
pub mod induced;
pub mod intertwiner;
pub mod matrix;
pub mod morita;
pub mod quiver;
pub mod rational;
pub mod rep;
pub mod sampling;
pub mod scalar;
pub mod selftest;
pub mod skew;
pub mod transport;

pub use cyclotomic::CycNumber;
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use rational::Rational;
pub use scalar::Scalar;

/// Matrices over the rationals.
pub type QMatrix = Matrix<Rational>;
/// Matrices over cyclotomic fields, the working scalar type of the pipeline.
pub type CycMatrix = Matrix<CycNumber>;
