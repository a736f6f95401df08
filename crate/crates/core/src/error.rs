use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("degenerate ground link: pivots A and B coincide")]
    DegenerateGroundLink,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("system is not square: {equations} equations in {unknowns} unknowns")]
    NonSquare { equations: usize, unknowns: usize },
    #[error("singular jacobian at configuration (input singularity)")]
    SingularJacobian,
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("threshold must be non-negative, got {0}")]
    InvalidThreshold(f64),
    #[error("configuration space is empty for this design")]
    EmptySample,
    #[error("no converged bottleneck; supply epsilon manually")]
    NoBottleneck,
    #[error("unhealthy start set for {problem}: expected {expected} solutions, found {found} ({diagnostics})")]
    UnhealthyStart {
        problem: String,
        expected: usize,
        found: usize,
        diagnostics: String,
    },
    #[error("no path: start in component {start_component}, goal in component {goal_component}")]
    NoPath {
        start_component: usize,
        goal_component: usize,
    },
    #[error("query configuration could not be attached to the graph")]
    DetachedQuery,
    #[error("numerical failure: {0}")]
    Numerical(String),
}
