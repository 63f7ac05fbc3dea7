use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("variable x{index} out of range (polynomial has {n_vars} variables)")]
    VariableOutOfRange { index: usize, n_vars: usize },

    #[error("exponent at position {pos} is not a nonnegative integer literal")]
    BadExponent { pos: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("scale entry {index} is zero")]
    ZeroScale { index: usize },

    #[error("integration bounds depend on the integration variable x{var}")]
    BoundDependsOnVariable { var: usize },

    #[error("empty point list")]
    EmptyPoints,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid rational literal {0:?}")]
    InvalidRational(String),

    #[error(
        "moment matrix B is numerically indefinite or ill-conditioned (cond_B ~ {cond_b:.3e}); \
         reduce r or rescale the domain"
    )]
    Conditioning { cond_b: f64 },

    #[error("moment table holds degree <= {available}, but degree {needed} is required")]
    InsufficientDegree { needed: usize, available: usize },

    #[error("operation not supported on {0} domains")]
    UnsupportedDomain(&'static str),

    #[error("density is not normalized: integral = {integral}")]
    NotNormalized { integral: f64 },

    #[error("conditional density vanishes at the prefix (denominator {denominator:e})")]
    DegeneratePrefix { denominator: f64 },

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error("point {0:?} lies outside the domain")]
    PointOutsideDomain(Vec<f64>),

    #[error("unknown test function {0:?}")]
    UnknownFunction(String),

    #[error("test function {0:?} needs a dimension")]
    MissingDimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
