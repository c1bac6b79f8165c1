use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point at node {node} violates the embedding constraint by {deviation:e}")]
    ConstraintViolation { node: usize, deviation: f64 },

    #[error("derivative order {0} is not supported (maximum 8)")]
    UnsupportedOrder(usize),

    #[error("k = {0} is not supported by this formulation")]
    UnsupportedK(usize),

    #[error("invalid differentiation scheme: {0}")]
    InvalidScheme(String),

    #[error("grid of {nodes} nodes is too small: {needed} required")]
    GridTooSmall { nodes: usize, needed: usize },

    #[error("interior-valid window is empty after {operation}")]
    EmptyWindow { operation: &'static str },

    #[error("curve is not unit speed: |speed - 1| = {deviation:e} at node {node}")]
    NotUnitSpeed { node: usize, deviation: f64 },

    #[error("unsupported target: {0}")]
    UnsupportedTarget(String),

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("frequencies {a} and {b} have no common period")]
    IncommensurateFrequencies { a: f64, b: f64 },

    #[error("invalid curve family: {0}")]
    InvalidFamily(String),

    #[error("curve is not {k}-harmonic: residual {residual:e} exceeds {threshold:e}")]
    NotCritical { k: usize, residual: f64, threshold: f64 },

    #[error("flow diverged at step {step}")]
    Diverged { step: usize },

    #[error("Hessian dimension {dim} exceeds the cap {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("factor domains differ: {0}")]
    DomainMismatch(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid curve spec at `{path}`: {message}")]
    InvalidSpec { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
