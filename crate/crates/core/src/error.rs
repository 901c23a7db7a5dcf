use thiserror::Error;

/// Errors produced by the metric, embedding and retraction routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point set is empty")]
    EmptyInput,

    #[error("non-finite coordinate {value} in point {index}")]
    NonFiniteCoordinate { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cone parameter must be nonnegative, got {0}")]
    NegativeParameter(f64),

    #[error("underlying distance {0} exceeds the cone diameter bound 2")]
    DiameterViolation(f64),

    #[error("set of cardinality {found} exceeds capacity {capacity}")]
    CapacityExceeded { capacity: usize, found: usize },

    #[error("parameter out of range: {0}")]
    BadRange(String),

    #[error("direction has norm {0}, expected a unit vector")]
    NonUnitDirection(f64),

    #[error("directions {0} and {1} are numerically parallel")]
    DegenerateFamily(usize, usize),

    #[error("output dimension for n = {0} overflows")]
    Overflow(usize),

    #[error("separation oracle {oracle} disagrees with closed form {analytic}")]
    CertificateMismatch { oracle: f64, analytic: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("sampled map violates its Lipschitz bound {bound} between samples {i} and {j} (ratio {ratio})")]
    NotLipschitz {
        bound: f64,
        ratio: f64,
        i: usize,
        j: usize,
    },

    #[error("no pair of distinct inputs was drawn")]
    DegenerateSample,
}

pub type Result<T> = std::result::Result<T, Error>;
