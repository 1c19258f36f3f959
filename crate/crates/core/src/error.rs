use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error("linear system is inconsistent")]
    Inconsistent,

    #[error("invalid rational literal {0:?}")]
    BadRational(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("follower problem is infeasible at the given leader decision")]
    InfeasibleAt,

    #[error("follower problem is unbounded below (assumption A1 violated)")]
    UnboundedBelow,

    #[error("maximum over the reaction set is unbounded")]
    UnboundedAbove,

    #[error("dual feasible set of the follower is empty")]
    EmptyDual,

    #[error("instance does not satisfy A1 (status {0}); pass the force flag to solve anyway")]
    RelaxedA1Refused(String),

    #[error("epigraph bounds are unbounded")]
    UnboundedEpigraph,

    #[error("a subproblem is unbounded; the instance violates A1")]
    UnboundedSubproblem,

    #[error("no subproblem optimum survived pointwise verification")]
    NoVerifiedCandidate,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("leader set has no extreme point")]
    NoVertices,

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
