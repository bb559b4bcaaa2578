use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error("unphysical state: |theta| = {norm:.6} exceeds {limit}")]
    Unphysical { norm: f64, limit: f64 },

    #[error("SLD operators are singular at |theta| = {0:.9} (state too close to pure)")]
    Singularity(f64),

    #[error("unsupported number of copies: {0} (expected 1 or 2)")]
    UnsupportedCopies(usize),

    #[error("degenerate weights ({0}, {1}, {2}): all weights must be strictly positive")]
    DegenerateWeights(f64, f64, f64),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("singular Fisher information: outcome {outcome} has p = {probability:.3e} with nonzero derivative")]
    SingularFisher { outcome: usize, probability: f64 },

    #[error("normalization mismatch: expected {expected}, got {found}")]
    NormalizationMismatch { expected: String, found: String },

    #[error(
        "SDP did not converge after {iterations} iterations (primal {primal:.9e}, dual {dual:.9e}, relative gap {gap:.3e})"
    )]
    SdpNotConverged {
        iterations: usize,
        primal: f64,
        dual: f64,
        gap: f64,
    },

    #[error("point is not on the single-copy boundary (residual {0:.3e})")]
    OffBoundary(f64),

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error(
        "maximum likelihood did not converge after {iterations} iterations (theta = {theta:?}, projected gradient {gradient_norm:.3e})"
    )]
    MleNotConverged {
        iterations: usize,
        theta: [f64; 3],
        gradient_norm: f64,
    },

    #[error("estimation failed at repeat {repeat}: {source}")]
    Repeat {
        repeat: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of an iterative numerical method, as opposed to
    /// rejected input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::SdpNotConverged { .. } | Error::MleNotConverged { .. } => true,
            Error::Repeat { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}
