use thiserror::Error;

use crate::pauli::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("matrix is not Hermitian (max |M - M^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver failed to converge within {max_iter} sweeps (dim {dim})")]
    EigenConvergence { dim: usize, max_iter: usize },

    #[error("matrix is singular: min |eigenvalue| = {min_abs:e}, spectral norm = {norm:e}")]
    Singular { min_abs: f64, norm: f64 },

    #[error("post-selection failed: outcome probability {probability:e}")]
    ZeroProbability { probability: f64 },

    #[error("operator is not a projector (max |P^2 - P| = {deviation:e})")]
    NotIdempotent { deviation: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("condition number must be >= 1, got {0}")]
    InvalidKappa(f64),

    #[error("expected a null space of dimension {expected}, found {found}")]
    NullityMismatch { expected: usize, found: usize },

    #[error("fidelity undefined for a zero-purity operator")]
    ZeroPurity,

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("schedule and instance disagree on the algorithm ({schedule:?} vs {instance:?})")]
    VariantMismatch {
        schedule: crate::schedule::Algorithm,
        instance: crate::schedule::Algorithm,
    },

    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
