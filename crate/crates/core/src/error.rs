use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square or has {found} entries for dimension {dim}")]
    MalformedMatrix { dim: usize, found: usize },

    #[error("non-finite entry in matrix")]
    NonFinite,

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("density operator trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("POVM element exceeds identity (max eigenvalue {max_eigenvalue})")]
    EffectAboveIdentity { max_eigenvalue: f64 },

    #[error("POVM elements do not sum to identity (max deviation {deviation:e})")]
    IncompletePovm { deviation: f64 },

    #[error("operator is not unitary (max deviation of U\u{2020}U from I is {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("state vector has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("zero vector has no canonical phase")]
    ZeroVector,

    #[error("probability has imaginary part {imag:e}")]
    ImaginaryProbability { imag: f64 },

    #[error("Kraus weight is negative ({weight:e})")]
    NegativeWeight { weight: f64 },

    #[error("unsupported dimension {0}; only 2 and 4 are supported")]
    UnsupportedDimension(usize),

    #[error("unsupported number of qubits {0}; only 1 and 2 are supported")]
    UnsupportedQubits(usize),

    #[error("unknown observable '{0}'")]
    UnknownObservable(String),

    #[error("unknown outcome '{0}'")]
    UnknownOutcome(String),

    #[error("table shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("incompatible outcome: evidence {evidence:e} is below threshold")]
    IncompatibleOutcome { evidence: f64 },

    #[error("time index {index} out of range 0..={max}")]
    TimeIndexOutOfRange { index: usize, max: usize },

    #[error("unitary steps are not ordered by time index")]
    UnorderedSteps,

    #[error("pre- and post-selected states are orthogonal")]
    OrthogonalSelection,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid projector pair: {0}")]
    InvalidProjectors(String),

    #[error("quadrature did not converge (estimates {coarse} and {fine})")]
    QuadratureNotConverged { coarse: f64, fine: f64 },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for the zero-evidence case, which callers usually report
    /// separately from malformed input.
    pub fn is_incompatible_outcome(&self) -> bool {
        matches!(self, Error::IncompatibleOutcome { .. })
    }
}
