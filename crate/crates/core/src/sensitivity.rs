//! Pareto sensitivity: derivatives of `x(lambda)` and `F(x(lambda))` with respect to the weights.
//!
//! Matrices follow the gradient convention: column `i` of `df_dlambda` is the
//! gradient of `f_i(x(lambda))` in weight space, and `dx_dlambda` is `q x n`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::inner_solvers::{active_inequalities, solve_weighted_sum, ScalarizedSolution, SolverOptions};
use crate::linalg::{default_rank_tol, pseudo_inverse, solve_dense, symmetry_defect};
use crate::problems::{evaluate, evaluate_constraints, MooProblem, Order};
use crate::scalar::Real;
use crate::scalarization::WeightVector;

#[derive(Debug, Clone)]
pub struct SensitivityResult<T: Real> {
    /// `q x n`.
    pub dx_dlambda: DMatrix<T>,
    /// `q x q`, columns are weight-space gradients of the objectives.
    pub df_dlambda: DMatrix<T>,
    pub pinv_df: DMatrix<T>,
    /// Descending.
    pub singular_values: DVector<T>,
    pub rank: usize,
    /// `|dF| |dF+|` in the 2-norm; infinite when the rank is zero.
    pub condition: T,
}

impl<T: Real> SensitivityResult<T> {
    pub fn from_parts(dx_dlambda: DMatrix<T>, gradients: &DMatrix<T>) -> Self {
        let df = &dx_dlambda * gradients;
        let q = df.nrows();
        let p = pseudo_inverse(&df, default_rank_tol::<T>(q));
        let condition = if p.rank == 0 {
            T::infinity()
        } else {
            p.singular_values[0] / p.singular_values[p.rank - 1]
        };
        Self {
            dx_dlambda,
            df_dlambda: df,
            pinv_df: p.pinv,
            singular_values: p.singular_values,
            rank: p.rank,
            condition,
        }
    }

    /// `max |dF - dF^T|`.
    pub fn symmetry_defect(&self) -> T {
        symmetry_defect(&self.df_dlambda)
    }

    /// `|dF lambda|_inf`, zero in exact arithmetic for unconstrained problems.
    pub fn null_vector_defect(&self, lambda: &WeightVector<T>) -> T {
        (&self.df_dlambda * lambda.as_vector()).amax()
    }

    /// Column norms of `df_dlambda`.
    pub fn column_norms(&self) -> Vec<T> {
        self.df_dlambda.column_iter().map(|c| c.norm()).collect()
    }
}

fn require_converged<T: Real>(sol: &ScalarizedSolution<T>) -> Result<()> {
    if sol.converged {
        Ok(())
    } else {
        Err(Error::MaxIterations {
            iterations: sol.iterations,
            residual: sol.grad_norm.to_f64_lossy(),
        })
    }
}

/// Unconstrained sensitivity: `dx = -G^T H_w^{-1}`, `dF = -G^T H_w^{-1} G`.
pub fn sensitivity_unconstrained<T: Real>(
    problem: &dyn MooProblem<T>,
    sol: &ScalarizedSolution<T>,
) -> Result<SensitivityResult<T>> {
    if problem.is_constrained() {
        return Err(Error::InvalidInput(format!(
            "{} is constrained; use the KKT path",
            problem.name()
        )));
    }
    require_converged(sol)?;
    let e = evaluate(problem, &sol.x, Order::Hessian)?;
    let g = e.gradients.expect("gradient requested");
    let n = problem.n();
    let hw = e
        .hessians
        .expect("hessian requested")
        .iter()
        .zip(sol.lambda.as_slice())
        .fold(DMatrix::zeros(n, n), |acc, (h, &w)| acc + h * w);
    // H_w^{-1} G is n x q; its negated transpose is dx/dlambda
    let hinv_g = solve_dense(&hw, &g).ok_or(Error::SingularWeightedHessian)?;
    Ok(SensitivityResult::from_parts(-hinv_g.transpose(), &g))
}

/// Jacobian of the KKT map `K(w) = (grad L, z_I * c_I, c_E)` at a solution.
#[derive(Debug, Clone)]
pub struct KktSystem<T: Real> {
    /// Stacked `(x, z_I, z_E)`.
    pub w: DVector<T>,
    /// Square, `n + |I| + |E|`.
    pub dk_dw: DMatrix<T>,
    /// `(n + |I| + |E|) x q`; top block holds the objective gradients.
    pub dk_dlambda: DMatrix<T>,
    /// `(I_n; 0)`, extracts the `x` rows.
    pub selector: DMatrix<T>,
    pub n: usize,
    pub num_inequalities: usize,
    pub num_equalities: usize,
}

/// Assembles the KKT Jacobian blocks at a constrained solution.
pub fn assemble_kkt<T: Real>(problem: &dyn MooProblem<T>, sol: &ScalarizedSolution<T>) -> Result<KktSystem<T>> {
    if !problem.is_constrained() {
        return Err(Error::Unconstrained(problem.name().to_string()));
    }
    let (n, mi, me) = (problem.n(), problem.num_inequalities(), problem.num_equalities());
    if sol.z_ineq.len() != mi || sol.z_eq.len() != me {
        return Err(Error::MissingMultipliers);
    }
    let o = evaluate(problem, &sol.x, Order::Hessian)?;
    let c = evaluate_constraints(problem, &sol.x, Order::Hessian)?;
    let g = o.gradients.expect("gradient requested");
    let ji = c.jac_ineq.expect("gradient requested");
    let je = c.jac_eq.expect("gradient requested");

    let mut hl = DMatrix::zeros(n, n);
    for (h, &w) in o.hessians.expect("hessian requested").iter().zip(sol.lambda.as_slice()) {
        hl += h * w;
    }
    for (h, &z) in c
        .hessians_ineq
        .expect("hessian requested")
        .iter()
        .zip(sol.z_ineq.iter())
    {
        hl += h * z;
    }
    for (h, &z) in c.hessians_eq.expect("hessian requested").iter().zip(sol.z_eq.iter()) {
        hl += h * z;
    }

    let k = n + mi + me;
    let mut m = DMatrix::zeros(k, k);
    m.view_mut((0, 0), (n, n)).copy_from(&hl);
    m.view_mut((0, n), (n, mi)).copy_from(&ji);
    m.view_mut((0, n + mi), (n, me)).copy_from(&je);
    for j in 0..mi {
        for r in 0..n {
            m[(n + j, r)] = sol.z_ineq[j] * ji[(r, j)];
        }
        m[(n + j, n + j)] = c.c_ineq[j];
    }
    m.view_mut((n + mi, 0), (me, n)).copy_from(&je.transpose());

    let mut dk_dlambda = DMatrix::zeros(k, problem.q());
    dk_dlambda.view_mut((0, 0), (n, problem.q())).copy_from(&g);
    let mut selector = DMatrix::zeros(k, n);
    selector.view_mut((0, 0), (n, n)).fill_with_identity();

    let mut w = DVector::zeros(k);
    w.rows_mut(0, n).copy_from(&sol.x);
    w.rows_mut(n, mi).copy_from(&sol.z_ineq);
    w.rows_mut(n + mi, me).copy_from(&sol.z_eq);
    Ok(KktSystem {
        w,
        dk_dw: m,
        dk_dlambda,
        selector,
        n,
        num_inequalities: mi,
        num_equalities: me,
    })
}

/// Constrained sensitivity by implicit differentiation of the KKT system.
pub fn sensitivity_constrained<T: Real>(
    problem: &dyn MooProblem<T>,
    sol: &ScalarizedSolution<T>,
) -> Result<SensitivityResult<T>> {
    require_converged(sol)?;
    let kkt = assemble_kkt(problem, sol)?;
    let dw = solve_dense(&kkt.dk_dw, &kkt.dk_dlambda).ok_or(Error::SingularKktJacobian)?;
    // dw/dlambda = -(dK/dw)^{-1} dK/dlambda; keep the x rows
    let dx = -(kkt.selector.transpose() * dw).transpose();
    let g = kkt.dk_dlambda.rows(0, kkt.n).into_owned();
    Ok(SensitivityResult::from_parts(dx, &g))
}

/// Chooses the unconstrained or KKT path by problem type.
pub fn sensitivity<T: Real>(problem: &dyn MooProblem<T>, sol: &ScalarizedSolution<T>) -> Result<SensitivityResult<T>> {
    if problem.is_constrained() {
        sensitivity_constrained(problem, sol)
    } else {
        sensitivity_unconstrained(problem, sol)
    }
}

/// Central finite-difference estimate of `df_dlambda`.
#[derive(Debug, Clone)]
pub struct FiniteDifference<T: Real> {
    pub df_dlambda: DMatrix<T>,
    /// False when some probe solution has a different active set than the center.
    pub active_set_stable: bool,
}

/// Differences `F(x(lambda +- h e_j))` with `h = step * max(1, lambda_j)`.
///
/// Probes are rescaled onto the simplex before solving; the weighted-sum
/// minimizer is invariant under positive scaling, so the full-space
/// derivative is recovered. Each probe is warm-started from `center.x`.
pub fn finite_difference<T: Real>(
    problem: &dyn MooProblem<T>,
    center: &ScalarizedSolution<T>,
    step: T,
    opts: &SolverOptions<T>,
) -> Result<FiniteDifference<T>> {
    let lam = center.lambda.as_vector();
    let q = lam.len();
    let active_of = |x: &DVector<T>| -> Result<Vec<usize>> {
        if !problem.is_constrained() {
            return Ok(Vec::new());
        }
        let c = evaluate_constraints(problem, x, Order::Gradient)?;
        Ok(active_inequalities(
            &c.c_ineq,
            &c.jac_ineq.expect("gradient requested"),
            opts.active_tol,
        ))
    };
    let center_active = active_of(&center.x)?;
    let mut stable = true;
    let mut df = DMatrix::zeros(q, q);
    for j in 0..q {
        let h = step * lam[j].abs().max(T::one());
        if lam[j] - h <= T::zero() {
            return Err(Error::InvalidInput(format!(
                "weight {j} = {} too close to the simplex boundary for step {h}",
                lam[j]
            )));
        }
        let mut probe = |sign: T| -> Result<DVector<T>> {
            let mut v = lam.clone();
            v[j] += sign * h;
            let total = v.sum();
            let w = WeightVector::new(v / total)?;
            let s = solve_weighted_sum(problem, &w, &center.x, opts)?;
            require_converged(&s)?;
            if active_of(&s.x)? != center_active {
                stable = false;
            }
            Ok(s.f_values)
        };
        let fp = probe(T::one())?;
        let fm = probe(-T::one())?;
        df.set_row(j, &((fp - fm) / (h + h)).transpose());
    }
    Ok(FiniteDifference {
        df_dlambda: df,
        active_set_stable: stable,
    })
}

/// `|A - B|_F / max(|A|_F, eps)`.
pub fn relative_error<T: Real>(analytic: &DMatrix<T>, approx: &DMatrix<T>) -> T {
    (analytic - approx).norm() / analytic.norm().max(T::eps())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{FunctionEval, Vfm1, Zlt1q};
    use approx::assert_relative_eq;

    fn w(v: &[f64]) -> WeightVector<f64> {
        WeightVector::from_slice(v).unwrap()
    }

    fn solve(p: &dyn MooProblem<f64>, lam: &[f64]) -> ScalarizedSolution<f64> {
        solve_weighted_sum(p, &w(lam), &DVector::zeros(p.n()), &SolverOptions::default()).unwrap()
    }

    #[test]
    fn zlt1_centroid_closed_form() {
        let p = Zlt1q::zlt1();
        let t = 1.0 / 3.0;
        let s = sensitivity(&p, &solve(&p, &[t, t, t])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { -4.0 / 3.0 } else { 2.0 / 3.0 };
                assert_relative_eq!(s.df_dlambda[(i, j)], expect, epsilon = 1e-8);
            }
            assert!(s.df_dlambda.row(i).sum().abs() < 1e-8);
        }
        assert_eq!(s.rank, 2);
        assert!(s.condition.is_finite());
    }

    #[test]
    fn zlt1_null_vector_and_symmetry() {
        let p = Zlt1q::zlt1();
        let sol = solve(&p, &[0.5, 0.3, 0.2]);
        let s = sensitivity(&p, &sol).unwrap();
        assert!(s.null_vector_defect(&sol.lambda) < 1e-10);
        assert!(s.symmetry_defect() < 1e-12);
    }

    /// `f1 = |x|^2`, `f2 = (x1-2)^2 + x2^2`, `x1 <= 0.5`.
    struct Check;

    impl MooProblem<f64> for Check {
        fn name(&self) -> &str {
            "check"
        }
        fn n(&self) -> usize {
            2
        }
        fn q(&self) -> usize {
            2
        }
        fn num_inequalities(&self) -> usize {
            1
        }
        fn objective(&self, i: usize, x: &DVector<f64>, order: Order) -> FunctionEval<f64> {
            let d = x - DVector::from_vec(vec![2.0 * i as f64, 0.0]);
            FunctionEval::build(order, d.norm_squared(), || d * 2.0, || DMatrix::identity(2, 2) * 2.0)
        }
        fn inequality(&self, _j: usize, x: &DVector<f64>, order: Order) -> FunctionEval<f64> {
            FunctionEval::build(
                order,
                x[0] - 0.5,
                || DVector::from_vec(vec![1.0, 0.0]),
                || DMatrix::zeros(2, 2),
            )
        }
    }

    #[test]
    fn check_problem_kkt_matrix() {
        let sol = solve(&Check, &[0.5, 0.5]);
        let k = assemble_kkt(&Check, &sol).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 0.0]);
        assert!((&k.dk_dw - expect).amax() < 1e-8);
        assert_relative_eq!(k.dk_dw.determinant(), -2.0, epsilon = 1e-8);
        let s = sensitivity(&Check, &sol).unwrap();
        assert!(s.dx_dlambda.amax() < 1e-10);
        assert!(s.df_dlambda.amax() < 1e-10);
    }

    #[test]
    fn inactive_constraints_reduce_to_unconstrained() {
        let cons = Vfm1::constrained();
        let free = Vfm1::unconstrained();
        let lam = [0.3, 0.3, 0.4];
        let sc = sensitivity(&cons, &solve(&cons, &lam)).unwrap();
        let su = sensitivity(&free, &solve(&free, &lam)).unwrap();
        assert!((sc.df_dlambda - su.df_dlambda).amax() < 1e-8);
    }

    #[test]
    fn inactive_row_decouples() {
        let cons = Vfm1::constrained();
        let sol = solve(&cons, &[0.3, 0.3, 0.4]);
        let k = assemble_kkt(&cons, &sol).unwrap();
        for j in 0..2 {
            assert!(k.dk_dw[(2 + j, 2 + j)] < 0.0);
            assert_eq!(k.dk_dw[(2 + j, 0)], 0.0);
        }
    }

    #[test]
    fn unconverged_solution_is_rejected() {
        let p = Zlt1q::zlt1();
        let mut sol = solve(&p, &[0.5, 0.3, 0.2]);
        sol.converged = false;
        assert!(matches!(sensitivity(&p, &sol), Err(Error::MaxIterations { .. })));
    }

    #[test]
    fn finite_difference_agrees_on_zlt1() {
        let p = Zlt1q::zlt1();
        let sol = solve(&p, &[0.5, 0.3, 0.2]);
        let s = sensitivity(&p, &sol).unwrap();
        let opts = SolverOptions::default().with_tolerance(1e-12, 500);
        let fd = finite_difference(&p, &sol, 1e-5, &opts).unwrap();
        assert!(relative_error(&s.df_dlambda, &fd.df_dlambda) < 1e-6);
    }
}
