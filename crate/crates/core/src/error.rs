use thiserror::Error;

/// Errors produced anywhere in the acquisition and recovery pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter matrix is not unimodular: |ad - bc - 1| = {residual:e}")]
    NotUnimodular { residual: f64 },

    #[error("unknown transform name `{0}`")]
    UnknownTransform(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("b = 0 (dilation branch) has no integral kernel")]
    ZeroB,

    #[error("parameter matrix unusable for recovery: {0}")]
    Precondition(String),

    #[error("invalid spike train: {0}")]
    InvalidSpikeTrain(String),

    #[error("invalid acquisition config: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("system has more unknowns ({unknowns}) than equations ({equations})")]
    Underdetermined { equations: usize, unknowns: usize },

    #[error(
        "IDFT system is rank deficient (condition {condition:e}) for N = {n}, fc = {fc}, T = {period}, tau = {tau}"
    )]
    RankDeficient {
        n: usize,
        fc: usize,
        period: f64,
        tau: f64,
        condition: f64,
    },

    #[error("{found} support locations exceed the identifiable maximum of {max}")]
    TooManyLocations { found: usize, max: usize },

    #[error("support locations {separation:e} apart are numerically collinear; collapse clusters first")]
    CollinearLocations { separation: f64 },

    #[error("pencil rank {available} is below the requested model order {needed}")]
    PencilRank { needed: usize, available: usize },

    #[error("eigenvalue iteration failed to converge: {0}")]
    NoConvergence(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("malformed table: {0}")]
    Table(String),
}

impl Error {
    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// The innermost error, with all stage labels stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
