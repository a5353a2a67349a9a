use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{default_rank_tol, pseudo_inverse};
use crate::problems::{evaluate, evaluate_constraints, MooProblem, Order};
use crate::scalar::Real;
use crate::scalarization::WeightVector;

/// Least-squares multipliers at a (near) KKT point.
#[derive(Debug, Clone)]
pub struct Multipliers<T: Real> {
    pub z_ineq: DVector<T>,
    pub z_eq: DVector<T>,
    /// Indices of inequalities treated as active.
    pub active: Vec<usize>,
}

/// Inequality `j` is active when `|c_j| <= active_tol * (1 + |grad c_j|)`.
pub fn active_inequalities<T: Real>(c: &DVector<T>, jac: &DMatrix<T>, active_tol: T) -> Vec<usize> {
    (0..c.len())
        .filter(|&j| c[j].abs() <= active_tol * (T::one() + jac.column(j).norm()))
        .collect()
}

/// Fits multipliers minimizing the stationarity residual over the active set.
///
/// Inactive inequality multipliers are zero. Fails when active constraint
/// gradients are linearly dependent.
pub fn recover_multipliers<T: Real>(
    problem: &dyn MooProblem<T>,
    lambda: &WeightVector<T>,
    x: &DVector<T>,
    active_tol: T,
) -> Result<Multipliers<T>> {
    let n = problem.n();
    let o = evaluate(problem, x, Order::Gradient)?;
    let c = evaluate_constraints(problem, x, Order::Gradient)?;
    let g = o.gradients.expect("gradient requested") * lambda.as_vector();
    let ji = c.jac_ineq.expect("gradient requested");
    let je = c.jac_eq.expect("gradient requested");
    let active = active_inequalities(&c.c_ineq, &ji, active_tol);
    let (ma, me) = (active.len(), je.ncols());

    let mut z_ineq = DVector::zeros(ji.ncols());
    let mut z_eq = DVector::zeros(me);
    if ma + me > 0 {
        let mut a = DMatrix::zeros(n, ma + me);
        for (k, &j) in active.iter().enumerate() {
            a.set_column(k, &ji.column(j));
        }
        a.view_mut((0, ma), (n, me)).copy_from(&je);
        let p = pseudo_inverse(&a, default_rank_tol::<T>(n.max(ma + me)));
        if p.rank < ma + me {
            return Err(Error::RankDeficientActiveJacobian);
        }
        let z = -(p.pinv * g);
        for (k, &j) in active.iter().enumerate() {
            z_ineq[j] = z[k];
        }
        z_eq.copy_from(&z.rows(ma, me));
    }
    let weak = active.iter().filter(|&&j| z_ineq[j] < T::lit(1e-8)).count();
    if weak > 0 {
        log::warn!(
            "{}: {weak} active constraint(s) with multiplier below 1e-8, strict complementarity at risk",
            problem.name()
        );
    }
    Ok(Multipliers { z_ineq, z_eq, active })
}
