use thiserror::Error;

/// Errors produced by frame construction, conversions and the checks built on them.
#[derive(Debug, Error)]
pub enum GptError {
    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate frame: smallest singular value {min_singular:e} is below threshold")]
    DegenerateFrame { min_singular: f64 },

    #[error("matrix is singular or ill-conditioned (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("invalid projector {index}: {reason}")]
    InvalidProjector { index: usize, reason: String },

    #[error("no non-negative integer signature reproduces the table (x_{index} = {value})")]
    NoSignature { index: usize, value: i128 },

    #[error("parameter {name} = {value} is outside [0, 1]")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("matrix does not belong to the N=2 family: {0}")]
    NotInFamily(String),

    #[error("no phase solution: cos(phi4 - phi3) = {cosine} is not strictly inside (-1, 1)")]
    NoPhaseSolution { cosine: f64 },

    #[error("operator is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("weight {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weights sum to {0}, which exceeds 1")]
    WeightsExceedUnity(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("malformed superoperator: {0}")]
    MalformedSuperoperator(String),

    #[error("endpoint {which} is not a pure state (deviation {deviation:e})")]
    ImpureEndpoint { which: &'static str, deviation: f64 },

    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("table is not strictly increasing: K({n}) = {k_n} but K({next}) = {k_next}")]
    NotStrictlyIncreasing {
        n: usize,
        k_n: u64,
        next: usize,
        k_next: u64,
    },

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("unknown pipeline `{0}`")]
    UnknownPipeline(String),

    #[error("malformed config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GptError>;
