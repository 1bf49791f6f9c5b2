use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),

    #[error("label {label} out of range for {clusters} clusters")]
    LabelOutOfRange { label: usize, clusters: usize },

    #[error("component {component} is degenerate (mass {mass:e})")]
    DegenerateComponent { component: usize, mass: f64 },

    #[error("too few points: n = {n} < K = {k}")]
    TooFewPoints { n: usize, k: usize },

    #[error("mismatched shapes: {0}")]
    MismatchedShapes(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("trial artifacts were not retained")]
    MissingTrialArtifacts,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
