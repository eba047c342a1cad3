use num_bigint::BigInt;
use thiserror::Error;

use crate::sw::SurgeryReport;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no vertices")]
    Empty,
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("edge references undeclared vertex `{0}`")]
    UnknownVertex(String),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("intersection form is not negative definite: leading principal minor of -I of order {order} is {minor}")]
    NotNegativeDefinite { order: usize, minor: BigInt },
    #[error("determinant {0} is too large for this implementation")]
    DeterminantTooLarge(BigInt),
    #[error("vector is not in the dual lattice")]
    NotInDualLattice,
    #[error("expected a vector with {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid vertex subset: {0}")]
    InvalidSubset(String),
    #[error("iteration cap {cap} exceeded in {what}")]
    IterationCap { what: &'static str, cap: usize },
    #[error("infeasible counting query: {0}")]
    InfeasibleQuery(String),
    #[error("too many constrained coordinates ({0}) for subset bookkeeping")]
    TooManyCoordinates(usize),
    #[error("Seiberg-Witten value for class {class} did not stabilize up to depth {last_depth}")]
    DepthNotStable { class: String, last_depth: u32 },
    #[error("method precondition failed: {0}")]
    MethodPreconditionFailed(String),
    #[error("quadratic fit rejected by held-out point: {0}")]
    FitInconsistent(String),
    #[error("coset of the kernel sublattice was not materialized")]
    CosetNotMaterialized,
    #[error("identity violated: {}", .0.summary())]
    IdentityViolation(Box<SurgeryReport>),
    #[error("component {0} is not rational")]
    ComponentNotRational(String),
    #[error("graph is not numerically Gorenstein")]
    NotGorenstein,
    #[error("internal disagreement: {0}")]
    InternalDisagreement(String),
    #[error("subgraph sweep over {n} vertices exceeds the cap of {cap}")]
    SubsetCapExceeded { n: usize, cap: usize },
    #[error("support bound violated: {0}")]
    BoundViolation(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
