//! Solvers for the weighted-sum subproblem `min sum lambda_i f_i(x)`.
//!
//! Unconstrained problems use [`bfgs`]; constrained ones use [`sqp`], which
//! also returns Lagrange multipliers.

mod bfgs;
mod multipliers;
mod qp;
mod sqp;

pub use bfgs::{bfgs, BfgsOptions, BfgsResult};
pub use multipliers::{active_inequalities, recover_multipliers, Multipliers};
pub use qp::{solve_qp, QpSolution};
pub use sqp::{sqp, KktResidual, SqpOptions, SqpResult};

use dashmap::DashMap;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::problems::{evaluate, MooProblem, Order};
use crate::scalar::Real;
use crate::scalarization::{weighted_sum, WeightVector};

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T: Real> {
    /// Gradient-norm tolerance for unconstrained solves.
    pub tol_stat: T,
    /// KKT residual tolerance for constrained solves.
    pub tol_kkt: T,
    pub bfgs_max_iter: usize,
    pub sqp_max_iter: usize,
    pub active_tol: T,
    /// Start grid solves from the previous grid solution.
    pub warm_start: bool,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        let tol = T::lit(1e-8).max(T::lit(100.0) * T::eps());
        Self {
            tol_stat: tol,
            tol_kkt: tol,
            bfgs_max_iter: 500,
            sqp_max_iter: 200,
            active_tol: T::lit(1e-6),
            warm_start: true,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    /// Same tolerance and iteration cap for both solvers.
    pub fn with_tolerance(mut self, tol: T, max_iter: usize) -> Self {
        self.tol_stat = tol;
        self.tol_kkt = tol;
        self.bfgs_max_iter = max_iter;
        self.sqp_max_iter = max_iter;
        self
    }
}

/// Solution `x(lambda)` of one weighted-sum subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarizedSolution<T: Real> {
    pub lambda: WeightVector<T>,
    pub x: DVector<T>,
    pub f_values: DVector<T>,
    pub z_ineq: DVector<T>,
    pub z_eq: DVector<T>,
    /// Stationarity residual: gradient norm, or the Lagrangian gradient's infinity norm.
    pub grad_norm: T,
    /// Full KKT residual for constrained solves.
    pub kkt: Option<KktResidual<T>>,
    pub converged: bool,
    pub iterations: usize,
}

/// Solves the weighted-sum subproblem from `x0`.
///
/// An exhausted iteration budget is reported through `converged = false`.
pub fn solve_weighted_sum<T: Real>(
    problem: &dyn MooProblem<T>,
    lambda: &WeightVector<T>,
    x0: &DVector<T>,
    opts: &SolverOptions<T>,
) -> Result<ScalarizedSolution<T>> {
    if lambda.len() != problem.q() {
        return Err(Error::DimensionMismatch {
            expected: problem.q(),
            got: lambda.len(),
        });
    }
    if x0.len() != problem.n() {
        return Err(Error::DimensionMismatch {
            expected: problem.n(),
            got: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("starting point has non-finite entries".into()));
    }

    let sol = if problem.is_constrained() {
        let r = sqp(
            problem,
            lambda,
            x0,
            &SqpOptions {
                tol_kkt: opts.tol_kkt,
                max_iter: opts.sqp_max_iter,
                active_tol: opts.active_tol,
            },
        )?;
        let f_values = evaluate(problem, &r.x, Order::Value)?.values;
        ScalarizedSolution {
            lambda: lambda.clone(),
            x: r.x,
            f_values,
            z_ineq: r.z_ineq,
            z_eq: r.z_eq,
            grad_norm: r.residual.stationarity,
            kkt: Some(r.residual),
            converged: r.converged,
            iterations: r.iterations,
        }
    } else {
        let f = |x: &DVector<T>| {
            let w = weighted_sum(problem, lambda, x, Order::Gradient)?;
            Ok((w.value, w.gradient.expect("gradient requested")))
        };
        let r = bfgs(
            f,
            x0,
            &BfgsOptions {
                tol_grad: opts.tol_stat,
                max_iter: opts.bfgs_max_iter,
                ..Default::default()
            },
        )?;
        let f_values = evaluate(problem, &r.x, Order::Value)?.values;
        ScalarizedSolution {
            lambda: lambda.clone(),
            x: r.x,
            f_values,
            z_ineq: DVector::zeros(0),
            z_eq: DVector::zeros(0),
            grad_norm: r.grad_norm,
            kkt: None,
            converged: r.converged,
            iterations: r.iterations,
        }
    };
    if !sol.converged {
        log::debug!(
            "{}: solve at lambda = {:?} stopped after {} iterations (residual {})",
            problem.name(),
            lambda.as_slice(),
            sol.iterations,
            sol.grad_norm
        );
    }
    Ok(sol)
}

type CacheKey = (Vec<u64>, Vec<u64>);

/// Memo of solutions keyed by `(lambda, x0)` for one problem and option set.
///
/// Keying on the start point keeps cached and uncached results identical.
pub struct SolutionCache<'p, T: Real> {
    problem: &'p dyn MooProblem<T>,
    opts: SolverOptions<T>,
    map: DashMap<CacheKey, ScalarizedSolution<T>>,
}

fn bits<T: Real>(v: &[T]) -> Vec<u64> {
    v.iter().map(|a| a.to_f64_lossy().to_bits()).collect()
}

impl<'p, T: Real> SolutionCache<'p, T> {
    pub fn new(problem: &'p dyn MooProblem<T>, opts: SolverOptions<T>) -> Self {
        Self {
            problem,
            opts,
            map: DashMap::new(),
        }
    }

    pub fn problem(&self) -> &'p dyn MooProblem<T> {
        self.problem
    }

    pub fn options(&self) -> &SolverOptions<T> {
        &self.opts
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn solve(&self, lambda: &WeightVector<T>, x0: &DVector<T>) -> Result<ScalarizedSolution<T>> {
        let key = (bits(lambda.as_slice()), bits(x0.as_slice()));
        if let Some(hit) = self.map.get(&key) {
            return Ok(hit.clone());
        }
        let sol = solve_weighted_sum(self.problem, lambda, x0, &self.opts)?;
        self.map.insert(key, sol.clone());
        Ok(sol)
    }
}
