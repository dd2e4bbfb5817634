use thiserror::Error;

/// Errors raised anywhere in the exact pipeline.
///
/// Every variant signals either a violated precondition or an internal
/// consistency failure; none of them is recoverable by retrying.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("local length did not stabilize within {bound} steps")]
    NoStabilization { bound: usize },
    #[error("Hilbert function did not stabilize below degree {cap}")]
    DegreeCapExceeded { cap: usize },
    #[error("strict transform could not be certified after {rounds} division rounds")]
    SaturationBound { rounds: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("consistency check failed: {0}")]
    Inconsistent(String),
    #[error("unsupported hyperplane: {0}")]
    UnsupportedHyperplane(String),
    #[error("image curve is not in the catalog: {0}")]
    NoMatch(String),
    #[error("group closure exceeded {bound} elements")]
    ClosureBound { bound: usize },
    #[error("matrix is not positive definite")]
    NotDefinite,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("zero vector")]
    ZeroVector,
    #[error("no lattice vector pairs to {target} with the canonical class")]
    NoCoset { target: String },
    #[error("input matrices do not form a group")]
    NotAGroup,
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("artifact parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
