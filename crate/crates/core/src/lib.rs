//! Pareto-front sensitivity, most-changing sub-fronts and knee search for
//! weighted-sum scalarizations of multi-objective problems.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`.
//!
//! ```
//! use pareto_knee::{mcf_value, make_problem, ProblemParams, SolverOptions, Weights};
//!
//! let zlt1 = make_problem::<f64>("ZLT1", &ProblemParams::new()).unwrap();
//! let third = 1.0 / 3.0;
//! let lambda = Weights::from_slice(&[third, third, third]).unwrap();
//! let mcf = mcf_value(zlt1.as_ref(), &lambda, &SolverOptions::default()).unwrap();
//! assert!((mcf - 1.0).abs() < 1e-10);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dfo;
pub mod error;
pub mod inner_solvers;
pub mod knee;
pub mod linalg;
pub mod neighborhoods;
pub mod problems;
pub mod scalar;
pub mod scalarization;
pub mod sensitivity;
pub mod table1;

pub use error::{Error, Result};
pub use inner_solvers::{solve_weighted_sum, ScalarizedSolution, SolutionCache, SolverOptions};
pub use knee::{find_knee, mcf_value, KneeMethod, KneeOptions, KneeResult};
pub use neighborhoods::{
    compute_mcm, compute_subfront, ideal_nadir, solve_grid, AlphaMode, GridSolutions, NeighborhoodKind,
    NeighborhoodSpec, SubFront,
};
pub use problems::{evaluate, evaluate_constraints, make_problem, MooProblem, Order, ProblemName, ProblemParams};
pub use scalar::Real;
pub use scalarization::{project_simplex, simplex_grid, SimplexGrid, WeightVector};
pub use sensitivity::{sensitivity, SensitivityResult};

pub type Weights = WeightVector<f64>;
pub type Grid = SimplexGrid<f64>;
pub type Solution = ScalarizedSolution<f64>;
pub type Sensitivity = SensitivityResult<f64>;
pub type Spec = NeighborhoodSpec<f64>;
pub type Solutions = GridSolutions<f64>;
pub type Front = SubFront<f64>;
pub type Knee = KneeResult<f64>;
pub type Problem = Box<dyn MooProblem<f64>>;
