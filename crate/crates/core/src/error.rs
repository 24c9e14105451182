use thiserror::Error;

/// Errors produced by constructors and numerical operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample space must contain at least one point")]
    EmptySpace,

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: String, index: usize },

    #[error("metric is not symmetric at ({i}, {j}): {a} vs {b}")]
    AsymmetricMetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("metric diagonal entry {i} is {value}, expected 0")]
    NonZeroDiagonal { i: usize, value: f64 },

    #[error("metric entry ({i}, {j}) = {value} must be strictly positive")]
    NonPositiveDistance { i: usize, j: usize, value: f64 },

    #[error(
        "triangle inequality violated: c({i},{k}) = {direct} > c({i},{j}) + c({j},{k}) = {detour}"
    )]
    TriangleInequalityViolated {
        i: usize,
        j: usize,
        k: usize,
        direct: f64,
        detour: f64,
    },

    #[error("graph edge ({node}, {node}) is a self-loop")]
    SelfLoop { node: usize },

    #[error("graph edge ({i}, {j}) references a point outside 0..{n}")]
    EdgeOutOfRange { i: usize, j: usize, n: usize },

    #[error("graph edge ({i}, {j}) has non-positive weight {weight}")]
    NonPositiveEdgeWeight { i: usize, j: usize, weight: f64 },

    #[error("graph is not connected")]
    GraphDisconnected,

    #[error("negative probability weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("probability weights sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("objects live on different sample spaces")]
    SpaceMismatch,

    #[error("explicit function class must contain at least one function")]
    EmptyClass,

    #[error("matrix is not symmetric at ({i}, {j})")]
    AsymmetricMatrix { i: usize, j: usize },

    #[error("Gram matrix is not positive definite: minimum eigenvalue {min_eigenvalue}")]
    SingularGram { min_eigenvalue: f64 },

    #[error("reference measure has zero mass at point {index}; opt into infinite-distance semantics to allow this")]
    ZeroMassPoint { index: usize },

    #[error("penalty is not homogeneous of degree {degree}: zeta({a}*h) = {scaled}, a^k*zeta(h) = {expected}")]
    NotHomogeneous {
        degree: f64,
        a: f64,
        scaled: f64,
        expected: f64,
    },

    #[error("homogeneity degree must be positive and finite, got {0}")]
    InvalidDegree(f64),

    #[error("space has no metric but the {0} class needs one")]
    MissingMetric(&'static str),

    #[error("space has no graph but the {0} class needs one")]
    MissingGraph(&'static str),

    #[error("operation {op} does not support the {variant} class")]
    UnsupportedVariant {
        op: &'static str,
        variant: &'static str,
    },

    #[error("penalty evaluator returned negative value {0}")]
    NegativeZeta(f64),

    #[error("radius must be positive, got {0}")]
    EpsNonPositive(f64),

    #[error("radius must be non-negative, got {0}")]
    EpsNegative(f64),

    #[error("quadratic form is not concave: largest eigenvalue {0}")]
    NotConcave(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("function class is not even")]
    NotEven,

    #[error("critic is not aligned: {0}")]
    NotAligned(String),

    #[error("unknown f-divergence {0:?}")]
    UnknownDivergence(String),

    #[error(
        "discriminator {member} takes value {value} at point {point}, outside the conjugate domain"
    )]
    DiscriminatorOutOfDomain {
        member: usize,
        point: usize,
        value: f64,
    },

    #[error("invalid f-divergence: {0}")]
    InvalidDivergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(what: impl Into<String>, expected: usize, got: usize) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected,
            got,
        }
    }

    /// True for failures of the numerical kernels rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalBreakdown(_))
    }
}
