//! Error type shared across the library.

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A matrix expected to be unitary failed the unitarity check.
    #[error("matrix is not unitary: defect {defect:.3e} exceeds limit {limit:.3e}")]
    NotUnitary { defect: f64, limit: f64 },

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    /// Operands belong to different groups.
    #[error("operands are defined over different groups")]
    GroupMismatch,

    /// The multiplication table does not describe a group.
    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    /// Group order exceeds the supported cap.
    #[error("group order {order} exceeds cap {cap}")]
    GroupTooLarge { order: usize, cap: usize },

    /// A (semi-)length function violated one of its axioms.
    #[error("invalid length function: {0}")]
    InvalidLength(String),

    /// A true length function (vanishing only at the identity) was required.
    #[error("length function required: {0}")]
    NotALength(String),

    /// A finite length function was required.
    #[error("length function takes an infinite value at element {element}")]
    InfiniteLength { element: usize },

    /// A map of groups is not a homomorphism.
    #[error("not a group homomorphism: fails at pair ({a}, {b})")]
    NotAHomomorphism { a: usize, b: usize },

    /// A family of matrices indexed by the group is not a unitary representation.
    #[error("not a representation: worst pair ({a}, {b}) has defect {defect:.3e}")]
    NotARepresentation { a: usize, b: usize, defect: f64 },

    /// Decomposition into irreducibles failed numerically.
    #[error("decomposition into irreducibles failed: {0}")]
    DecompositionFailed(String),

    /// An abelian group was required.
    #[error("operation requires an abelian group")]
    NotAbelian,

    /// The quadratic form of a lattice is not symmetric positive definite.
    #[error("invalid lattice data: {0}")]
    InvalidLattice(String),

    /// A point expected to be a character (integer dual vector) is not.
    #[error("not a character: entry {entry} is {value} away from an integer (tol {tol:.1e})")]
    NotACharacter { entry: usize, value: f64, tol: f64 },

    /// A requested dimension exceeds the supported cap.
    #[error("dimension {dim} exceeds cap {cap}")]
    DimTooLarge { dim: usize, cap: usize },

    /// Invalid argument to an operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Experiment specification failed validation.
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    /// An internal consistency check failed (indicates a bug, not bad input).
    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
