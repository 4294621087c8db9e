use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("molecule is not balanced: total weight {0:e}")]
    Unbalanced(f64),

    #[error("point {0} is not part of the space")]
    OffSpace(usize),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex iteration limit reached after {0} pivots")]
    IterationLimit(usize),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("geometry is not on the grid: {0}")]
    OffGrid(String),

    #[error("unsupported map: {0}")]
    UnsupportedMap(String),

    #[error("non-convex primitive in closed set: {0}")]
    NonConvexPrimitive(String),

    #[error("malformed partition: {0}")]
    MalformedPartition(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("chain is not contained in the convex set")]
    OutsideConvexSet,

    #[error("no admissible shift found after {0} refinements")]
    NoAdmissibleShift(usize),

    #[error("iteration budget of {0} rounds exhausted")]
    IterationBudget(usize),

    #[error("chain does not lie in the hyperplane")]
    NotInHyperplane,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
