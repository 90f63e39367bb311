//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{context}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{context}: matrix is not symmetric")]
    NotSymmetric { context: &'static str },

    #[error("{context}: matrix is not positive definite")]
    NotPositiveDefinite { context: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight at ({row}, {col}) is nonzero outside the collaboration topology")]
    SparsityViolation { row: usize, col: usize },

    #[error("node {node} lacks a self-loop; every sensor must retain its own observation")]
    MissingSelfLoop { node: usize },

    #[error("position {index} at ({x}, {y}) lies outside the unit square")]
    PositionOutOfRange { index: usize, x: f64, y: f64 },

    /// The channel-weighted gram matrix of the embedding is singular, so the
    /// optimal-weight formulas do not apply. Carries a unit vector spanning
    /// (approximately) the null space to help diagnose the topology.
    #[error("embedded gram matrix is singular; no information reaches the fusion center along part of the weight space")]
    SingularGram { null_direction: Vec<f64> },

    /// Requested Fisher information at or above the centralized ceiling.
    #[error("information target {requested} is infeasible: centralized limit is {limit} (gap {gap:e})")]
    InfeasibleInfo { requested: f64, limit: f64, gap: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    /// Internal consistency check of the sparse-to-dense embedding failed.
    #[error("embedding self-check failed: {0}")]
    EmbeddingCheck(String),
}
