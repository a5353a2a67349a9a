use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite evaluation ({0})")]
    NonFiniteEvaluation(&'static str),

    #[error("problem `{0}` has no constraints")]
    Unconstrained(String),

    #[error("weight vector is not in the simplex: {0}")]
    InfeasibleWeights(String),

    #[error("invalid grid step {0}")]
    InvalidGridStep(f64),

    #[error("inner solver hit the iteration limit ({iterations}) with residual {residual:e}")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("weighted-sum Hessian model is singular")]
    SingularHessianModel,

    #[error("quadratic subproblem is infeasible")]
    InfeasibleSubproblem,

    #[error("active constraint Jacobian is rank deficient (LICQ fails)")]
    RankDeficientActiveJacobian,

    #[error("weighted-sum Hessian is singular at x(lambda)")]
    SingularWeightedHessian,

    #[error("KKT Jacobian is singular (LICQ, strict complementarity or SOSC fails)")]
    SingularKktJacobian,

    #[error("solution carries no Lagrange multipliers")]
    MissingMultipliers,

    #[error("neighborhood is degenerate: {0}")]
    DegenerateNeighborhood(String),

    #[error("objective {0} is constant over the weight grid")]
    ZeroFullRange(usize),

    #[error("too many grid solves failed ({failed} of {total})")]
    GridSolveFailures { failed: usize, total: usize },

    #[error("maximal-change function is undefined at every evaluated weight vector")]
    McfUndefined,

    #[error("evaluation budget exhausted after {0} evaluations")]
    MaxEvaluations(usize),

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
