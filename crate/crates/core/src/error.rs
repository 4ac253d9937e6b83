use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("field of order {p}^{n} exceeds the supported size")]
    FieldTooLarge { p: u32, n: u32 },

    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("no ample complement found for d <= {0}")]
    SearchExhausted(u64),

    #[error("degenerate quadratic form")]
    DegenerateForm,

    #[error("determinant of M{0} is identically zero")]
    ZeroDeterminant(usize),

    #[error("all cofactor quadruples vanish at {0}")]
    Undefined(String),

    #[error("point {0} does not lie on the source surface")]
    NotOnSurface(String),

    #[error("chain orientation check failed: {0}")]
    Orientation(String),

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("bad reduction: {0}")]
    BadReduction(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("sign of the functional equation is undetermined (middle coefficient is zero)")]
    AmbiguousSign,

    #[error("characteristic polynomial must be monic")]
    NotMonic,

    #[error("kernel dimension failed to stabilize after {0} batches")]
    Unstable(usize),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
