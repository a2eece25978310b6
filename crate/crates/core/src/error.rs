use thiserror::Error;

/// Errors surfaced by model validation, posterior algebra, bounds, and oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("component index {index} out of range for {count} components")]
    ComponentIndex { index: usize, count: usize },

    #[error("reflexive pair: alpha and beta must differ")]
    ReflexivePair,

    #[error("bound undefined: {0}")]
    BoundUndefined(String),

    #[error("retrieval margins not applicable: {0}")]
    MarginsNotApplicable(String),

    #[error("grid too coarse: spacing {spacing:.3e} exceeds {required:.3e}")]
    GridTooCoarse { spacing: f64, required: f64 },

    #[error("unsupported polyhedron with {0} vertices (expected 4, 6, 8, 12, or 20)")]
    UnsupportedPolyhedron(usize),

    #[error("scenario precondition violated: {0}")]
    ScenarioPrecondition(String),

    #[error("internal numerical failure: {0}")]
    Numerical(String),
}
