use thiserror::Error;

use crate::order::Id;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("order relation has a cycle through {0:?}")]
    CycleDetected(Vec<Id>),
    #[error("unknown element {0}")]
    UnknownElement(Id),
    #[error("duplicate element id {0}")]
    DuplicateElement(Id),
    #[error("not a substructure: orders disagree on ({0}, {1})")]
    NotASubstructure(Id, Id),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("structures disagree on the common part at {0:?}")]
    Disagreement(Vec<Id>),
    #[error("gadget allocation does not match the step input: {0}")]
    AllocationMismatch(String),
    #[error("spare pool exhausted")]
    SparePoolExhausted,
    #[error("extension chain deeper than budget {0}")]
    DepthExceeded(usize),
    #[error("nine-case table violated in case {case}: {witness:?}")]
    TableViolation { case: String, witness: Vec<Id> },
    #[error("no delta-system of size {0}")]
    NotFound(usize),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("no unique value for {0} in the upper-bound relation")]
    NotAFunctionGraph(Id),
    #[error("map is not monotone: {0} <= {1} but images are not ordered")]
    NotMonotone(Id, Id),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
