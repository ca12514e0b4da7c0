//! Shared error type for the whole crate.

use thiserror::Error;

/// Errors surfaced by matrix, algebra, and decomposition operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A matrix or vector failed a structural check at construction.
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// Tolerances must be strictly positive and at most 1e-2.
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    /// The QR iteration exceeded its sweep budget.
    #[error("eigenvalue iteration did not converge within {sweeps} sweeps (dim {dim})")]
    NonConvergence { dim: usize, sweeps: usize },

    /// Operands live over different quantum spaces.
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    /// A quotient map or measure support failed validation.
    #[error("invalid quantum space: {0}")]
    InvalidSpace(String),

    /// Matrix dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Algebra closure would exceed the ambient cap.
    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    /// A density matrix is not a state (hermitian, positive, unit trace).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// An element does not lie in the span of the presented algebra.
    #[error("element not in algebra span (residual {residual:.3e})")]
    NotInAlgebra { residual: f64 },

    /// A state expected to be pure has a reducible GNS representation.
    #[error("state {index} is not pure (commutant dimension {commutant_dim})")]
    ImpureState { index: usize, commutant_dim: usize },

    /// Pairwise equivalence produced a non-transitive partition.
    #[error("equivalence relation not transitive at states ({0}, {1}, {2})")]
    EquivalenceNotTransitive(usize, usize, usize),

    /// Pure-state sampling kept producing reducible representations.
    #[error("pure-state sampling failed: {0}")]
    SamplingFailed(String),

    /// The operator is not normal within tolerance.
    #[error("operator not normal: commutator residual {residual:.3e} exceeds bound {bound:.3e}")]
    NotNormal { residual: f64, bound: f64 },

    /// A spectral-measure label was not supplied a value.
    #[error("missing value for label {0:?}")]
    MissingLabel(String),

    /// A label subset refers to labels the measure does not carry.
    #[error("unknown label {0:?}")]
    LabelMismatch(String),

    /// An operation precondition failed.
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// Invariant subspaces require ambient dimension at least 2.
    #[error("dimension too small: need at least 2, got {0}")]
    DimensionTooSmall(usize),

    /// Two representations compared over different algebras.
    #[error("representations come from different algebras")]
    AlgebraMismatch,

    /// Input file or JSON structure could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
