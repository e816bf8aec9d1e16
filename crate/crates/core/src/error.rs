use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input at vector {vector}: {reason}")]
    DegenerateInput { vector: usize, reason: String },

    #[error("degenerate form: {0}")]
    DegenerateForm(String),

    #[error("singular matrix in {0}")]
    Singular(String),

    #[error("spectral singularity: eigenvalue {eigenvalue} is within tolerance of 1/2")]
    SpectralSingularity { eigenvalue: f64 },

    #[error("form is not a basis projection; double it first")]
    NotAProjection,

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("spectrum touches the boundary {{0, 1}}: {0}")]
    Boundary(String),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("insufficient cutoff: {0}")]
    InsufficientCutoff(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("block {index}: {source}")]
    Block {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
