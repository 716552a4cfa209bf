use thiserror::Error;

/// Errors produced by the svident library.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A multi-index pair failed validation (length mismatch, zero entries).
    #[error("invalid variety format: {0}")]
    InvalidSpec(String),

    /// A factor point was the zero vector, which does not define a point of
    /// projective space.
    #[error("factor point {factor} is the zero vector")]
    ZeroPoint { factor: usize },

    /// A linear form handed to the Hessian evaluator does not vanish on the
    /// tangent frame at the base point.
    #[error("linear form does not vanish on the tangent frame (row {row})")]
    PreconditionViolated { row: usize },

    /// The stacked tangent frames span the whole ambient space, so the
    /// tangential linear system is empty.
    #[error("tangent frames span the ambient space at h = {h}; no tangential system")]
    FullSpan { h: usize },

    /// A check requiring perfection or defect-freeness was invoked on a
    /// format that does not satisfy those hypotheses.
    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),

    /// The decomposition search was handed the zero tensor.
    #[error("input tensor is zero")]
    ZeroTensor,

    /// A single local search start failed to converge.
    #[error("decomposition search start failed: {0:?}")]
    SearchFailed(FitFailure),

    /// The generic rank is too large to run a desk-scale numerical check.
    #[error("generic rank {0} exceeds the desk-scale limit for this operation")]
    RankTooLarge(String),
}

/// Why a single Levenberg-Marquardt start gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FitFailure {
    /// Iteration budget exhausted before the residual tolerance was met.
    MaxIter,
    /// The accepted step shrank below the relative step floor.
    Stalled,
}
