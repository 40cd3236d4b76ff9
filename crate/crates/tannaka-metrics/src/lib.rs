//! Numerical toolkit for metric duality on finite groups.
//!
//! Given a finite group `G` with a length function and a bi-invariant metric
//! on the unitary groups, this crate computes:
//!
//! * distances between unitary representations (`dual::dbar`, `dual::dreps`),
//! * the induced Lipschitz seminorm of a representation (`dual::lreps`),
//! * the double-dual length function recovered from a family of
//!   representations (`dual::double_dual_length`) and the associated
//!   stability check `l = l^dd`,
//! * closed-form dual/double-dual lengths for abelian groups and lattices
//!   (`pontryagin`),
//! * Lipschitz seminorms on matrix algebras induced by a representation
//!   (`lipnorm`).
//!
//! All randomized routines draw from ChaCha8 seeded through
//! [`linalg::rng_for`], so every result is reproducible for a fixed seed
//! regardless of thread count.

pub mod dual;
pub mod error;
pub mod experiment;
pub mod group;
pub mod linalg;
pub mod lipnorm;
mod lp;
pub mod pontryagin;
pub mod rep;
pub mod unitary;

pub use error::{Error, Result};

/// Version of the library, stamped into reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
