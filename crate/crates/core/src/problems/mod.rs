//! Multi-objective problems with analytic first and second derivatives.
//!
//! A problem is anything implementing [`MooProblem`]. Objectives and
//! constraints are evaluated one function at a time; [`evaluate`] and
//! [`evaluate_constraints`] stack them into the matrices the sensitivity
//! code consumes (gradients as columns of an `n x q` matrix).

mod catalog;
mod dominance;
mod registry;

pub use catalog::{Das1, Do2dk, Grv1, Grv2, Vfm1, Zlt1q};
pub use dominance::{dominates, Dominance};
pub use registry::{make_problem, ProblemName, ProblemParams};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Derivative order requested from an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    Value = 0,
    Gradient = 1,
    Hessian = 2,
}

impl Order {
    pub fn from_level(level: u8) -> Result<Self> {
        match level {
            0 => Ok(Order::Value),
            1 => Ok(Order::Gradient),
            2 => Ok(Order::Hessian),
            _ => Err(Error::InvalidInput(format!("derivative order {level} not in 0..=2"))),
        }
    }

    #[inline]
    pub fn wants_gradient(self) -> bool {
        self >= Order::Gradient
    }

    #[inline]
    pub fn wants_hessian(self) -> bool {
        self == Order::Hessian
    }
}

/// Value and optional derivatives of one scalar function.
#[derive(Debug, Clone)]
pub struct FunctionEval<T: Real> {
    pub value: T,
    pub gradient: Option<DVector<T>>,
    pub hessian: Option<DMatrix<T>>,
}

impl<T: Real> FunctionEval<T> {
    /// Builds an evaluation, computing the derivative closures only when `order` asks for them.
    pub fn build(
        order: Order,
        value: T,
        gradient: impl FnOnce() -> DVector<T>,
        hessian: impl FnOnce() -> DMatrix<T>,
    ) -> Self {
        Self {
            value,
            gradient: order.wants_gradient().then(gradient),
            hessian: order.wants_hessian().then(hessian),
        }
    }
}

/// A multi-objective problem `min F(x)` subject to `c_I(x) <= 0`, `c_E(x) = 0`.
///
/// Implementations must be immutable after construction; all methods are pure.
pub trait MooProblem<T: Real>: Send + Sync {
    fn name(&self) -> &str;

    /// Decision dimension.
    fn n(&self) -> usize;

    /// Number of objectives.
    fn q(&self) -> usize;

    fn num_inequalities(&self) -> usize {
        0
    }

    fn num_equalities(&self) -> usize {
        0
    }

    fn is_constrained(&self) -> bool {
        self.num_inequalities() + self.num_equalities() > 0
    }

    /// Problem-specific parameters, for reporting.
    fn params(&self) -> Vec<(&'static str, f64)> {
        Vec::new()
    }

    /// Objective `i` at `x`.
    fn objective(&self, i: usize, x: &DVector<T>, order: Order) -> FunctionEval<T>;

    /// Inequality constraint `j` (`c_j(x) <= 0`).
    fn inequality(&self, j: usize, _x: &DVector<T>, _order: Order) -> FunctionEval<T> {
        panic!("{}: no inequality constraint {j}", self.name())
    }

    /// Equality constraint `j` (`c_j(x) = 0`).
    fn equality(&self, j: usize, _x: &DVector<T>, _order: Order) -> FunctionEval<T> {
        panic!("{}: no equality constraint {j}", self.name())
    }
}

/// Objective values, gradient matrix `G` (`n x q`, column `i` is grad f_i) and Hessians.
#[derive(Debug, Clone)]
pub struct ObjectiveEvaluation<T: Real> {
    pub values: DVector<T>,
    pub gradients: Option<DMatrix<T>>,
    pub hessians: Option<Vec<DMatrix<T>>>,
}

/// Constraint values, Jacobians (`n x |I|`, `n x |E|`, gradients as columns) and Hessians.
#[derive(Debug, Clone)]
pub struct ConstraintEvaluation<T: Real> {
    pub c_ineq: DVector<T>,
    pub c_eq: DVector<T>,
    pub jac_ineq: Option<DMatrix<T>>,
    pub jac_eq: Option<DMatrix<T>>,
    pub hessians_ineq: Option<Vec<DMatrix<T>>>,
    pub hessians_eq: Option<Vec<DMatrix<T>>>,
}

fn check_point<T: Real>(n: usize, x: &DVector<T>) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("x has non-finite entries".into()));
    }
    Ok(())
}

fn check_eval<T: Real>(e: &FunctionEval<T>, what: &'static str) -> Result<()> {
    let finite = e.value.is_finite()
        && e.gradient.as_ref().is_none_or(|g| g.iter().all(|v| v.is_finite()))
        && e.hessian.as_ref().is_none_or(|h| h.iter().all(|v| v.is_finite()));
    if finite {
        Ok(())
    } else {
        Err(Error::NonFiniteEvaluation(what))
    }
}

type Stacked<T> = (DVector<T>, Option<DMatrix<T>>, Option<Vec<DMatrix<T>>>);

fn stack<T: Real>(n: usize, evals: Vec<FunctionEval<T>>, order: Order, what: &'static str) -> Result<Stacked<T>> {
    for e in &evals {
        check_eval(e, what)?;
    }
    let values = DVector::from_iterator(evals.len(), evals.iter().map(|e| e.value));
    let grads = order.wants_gradient().then(|| {
        let mut g = DMatrix::zeros(n, evals.len());
        for (k, e) in evals.iter().enumerate() {
            g.set_column(k, e.gradient.as_ref().expect("gradient requested"));
        }
        g
    });
    let hess = order.wants_hessian().then(|| {
        evals
            .into_iter()
            .map(|e| e.hessian.expect("hessian requested"))
            .collect()
    });
    Ok((values, grads, hess))
}

/// Evaluates all objectives at `x` up to the requested derivative order.
pub fn evaluate<T: Real>(problem: &dyn MooProblem<T>, x: &DVector<T>, order: Order) -> Result<ObjectiveEvaluation<T>> {
    check_point(problem.n(), x)?;
    let evals = (0..problem.q()).map(|i| problem.objective(i, x, order)).collect();
    let (values, gradients, hessians) = stack(problem.n(), evals, order, "objective")?;
    Ok(ObjectiveEvaluation {
        values,
        gradients,
        hessians,
    })
}

/// Evaluates all constraints at `x`, in declaration order.
pub fn evaluate_constraints<T: Real>(
    problem: &dyn MooProblem<T>,
    x: &DVector<T>,
    order: Order,
) -> Result<ConstraintEvaluation<T>> {
    if !problem.is_constrained() {
        return Err(Error::Unconstrained(problem.name().to_string()));
    }
    check_point(problem.n(), x)?;
    let n = problem.n();
    let ineq = (0..problem.num_inequalities())
        .map(|j| problem.inequality(j, x, order))
        .collect();
    let eq = (0..problem.num_equalities())
        .map(|j| problem.equality(j, x, order))
        .collect();
    let (c_ineq, jac_ineq, hessians_ineq) = stack(n, ineq, order, "inequality constraint")?;
    let (c_eq, jac_eq, hessians_eq) = stack(n, eq, order, "equality constraint")?;
    Ok(ConstraintEvaluation {
        c_ineq,
        c_eq,
        jac_ineq,
        jac_eq,
        hessians_ineq,
        hessians_eq,
    })
}
