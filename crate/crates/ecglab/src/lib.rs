//! Extremal cocycle growth (ECG) for concrete geometric group actions, and
//! simulation of the associated group-indexed symmetric alpha-stable random
//! fields.
//!
//! The library covers three concrete models:
//!
//! * the free group `F_d` acting on its tree boundary with the uniform
//!   (Patterson-Sullivan) measure,
//! * homomorphism-kernel subgroups `H <= F_d` acting on the tree boundary
//!   with an empirical Patterson measure built from orbit weights,
//! * `PSL(2,Z)` acting on the circle boundary of the hyperbolic plane with
//!   the harmonic (Cauchy) measure based at `i`.
//!
//! For each model the central quantities are the pointwise maxima
//! `A_n(xi) = max_{g in B_n} dμ_{g.o}/dμ(xi)`, their expectation `Ā_n`, and
//! the normalized extremal cocycle `C_n = Ā_n / exp(v n)`.  Non-vanishing of
//! `C_n` corresponds to i.i.d.-like Fréchet growth of the partial maxima of
//! the stable field; vanishing `C_n` drags the normalized maxima to zero.

pub mod boundary;
pub mod ecg;
pub mod error;
pub mod mobius;
pub mod patterson;
pub mod runner;
pub mod seeding;
pub mod stable;
pub mod stats;
pub mod subgroup;
pub mod trie;
pub mod words;

pub use error::EcgError;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, EcgError>;
