//! Sequential quadratic programming for the constrained weighted sum.
//!
//! Damped-BFGS Lagrangian model, l1 merit with Armijo backtracking, and a
//! final Newton pass on the KKT equations of the identified active set.

use nalgebra::{DMatrix, DVector};

use super::qp::solve_qp;
use crate::error::{Error, Result};
use crate::linalg::solve_dense_vec;
use crate::problems::{evaluate, evaluate_constraints, MooProblem, Order};
use crate::scalar::Real;
use crate::scalarization::WeightVector;

/// Point with its inequality and equality multipliers.
type Polished<T> = (Point<T>, DVector<T>, DVector<T>);

#[derive(Debug, Clone, Copy)]
pub struct SqpOptions<T: Real> {
    pub tol_kkt: T,
    pub max_iter: usize,
    /// Threshold for treating an inequality as active.
    pub active_tol: T,
}

impl<T: Real> Default for SqpOptions<T> {
    fn default() -> Self {
        Self {
            tol_kkt: T::lit(1e-8).max(T::lit(100.0) * T::eps()),
            max_iter: 200,
            active_tol: T::lit(1e-6),
        }
    }
}

/// Componentwise KKT residual (infinity norms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResidual<T: Real> {
    pub stationarity: T,
    pub complementarity: T,
    pub feasibility: T,
    /// Largest negative inequality multiplier, as a positive number.
    pub dual_infeasibility: T,
}

impl<T: Real> KktResidual<T> {
    pub fn max(&self) -> T {
        self.stationarity
            .max(self.complementarity)
            .max(self.feasibility)
            .max(self.dual_infeasibility)
    }
}

#[derive(Debug, Clone)]
pub struct SqpResult<T: Real> {
    pub x: DVector<T>,
    pub z_ineq: DVector<T>,
    pub z_eq: DVector<T>,
    pub residual: KktResidual<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// First-order data at one point.
struct Point<T: Real> {
    x: DVector<T>,
    f: T,
    g: DVector<T>,
    ci: DVector<T>,
    ce: DVector<T>,
    ji: DMatrix<T>,
    je: DMatrix<T>,
}

impl<T: Real> Point<T> {
    fn eval(problem: &dyn MooProblem<T>, lambda: &DVector<T>, x: DVector<T>) -> Result<Self> {
        let o = evaluate(problem, &x, Order::Gradient)?;
        let c = evaluate_constraints(problem, &x, Order::Gradient)?;
        Ok(Self {
            f: o.values.dot(lambda),
            g: o.gradients.expect("gradient requested") * lambda,
            ci: c.c_ineq,
            ce: c.c_eq,
            ji: c.jac_ineq.expect("gradient requested"),
            je: c.jac_eq.expect("gradient requested"),
            x,
        })
    }

    fn violation(&self) -> T {
        self.ci.iter().map(|&c| c.max(T::zero())).sum::<T>() + self.ce.iter().map(|c| c.abs()).sum::<T>()
    }

    fn lagrangian_gradient(&self, zi: &DVector<T>, ze: &DVector<T>) -> DVector<T> {
        &self.g + &self.ji * zi + &self.je * ze
    }

    fn residual(&self, zi: &DVector<T>, ze: &DVector<T>) -> KktResidual<T> {
        let inf = |v: &DVector<T>| v.iter().fold(T::zero(), |m, a| m.max(a.abs()));
        let feas_i = self.ci.iter().fold(T::zero(), |m, &c| m.max(c));
        KktResidual {
            stationarity: inf(&self.lagrangian_gradient(zi, ze)),
            complementarity: inf(&zi.component_mul(&self.ci)),
            feasibility: feas_i.max(inf(&self.ce)),
            dual_infeasibility: zi.iter().fold(T::zero(), |m, &z| m.max(-z)),
        }
    }
}

fn inf_norm<T: Real>(v: &DVector<T>) -> T {
    v.iter().fold(T::zero(), |m, a| m.max(a.abs()))
}

/// Exact Hessian of the Lagrangian.
fn lagrangian_hessian<T: Real>(
    problem: &dyn MooProblem<T>,
    lambda: &DVector<T>,
    x: &DVector<T>,
    zi: &DVector<T>,
    ze: &DVector<T>,
) -> Result<DMatrix<T>> {
    let n = problem.n();
    let o = evaluate(problem, x, Order::Hessian)?;
    let c = evaluate_constraints(problem, x, Order::Hessian)?;
    let mut h = DMatrix::zeros(n, n);
    for (hi, &w) in o.hessians.expect("hessian requested").iter().zip(lambda.iter()) {
        h += hi * w;
    }
    for (hj, &z) in c.hessians_ineq.expect("hessian requested").iter().zip(zi.iter()) {
        h += hj * z;
    }
    for (hj, &z) in c.hessians_eq.expect("hessian requested").iter().zip(ze.iter()) {
        h += hj * z;
    }
    Ok(h)
}

/// Newton iterations on the equality-constrained KKT system of the near-active set.
///
/// Returns `None` when the result is not a valid KKT point of the full problem.
fn polish<T: Real>(
    problem: &dyn MooProblem<T>,
    lambda: &DVector<T>,
    start: &Point<T>,
    zi: &DVector<T>,
    ze: &DVector<T>,
    opts: &SqpOptions<T>,
) -> Result<Option<Polished<T>>> {
    let n = problem.n();
    let active: Vec<usize> = (0..start.ci.len())
        .filter(|&j| {
            let scale = T::one() + start.ji.column(j).norm();
            start.ci[j] >= -opts.active_tol * scale || zi[j] > opts.active_tol
        })
        .collect();
    let (ma, me) = (active.len(), start.ce.len());
    if ma + me > n {
        return Ok(None);
    }
    let target = (opts.tol_kkt * T::lit(1e-4)).max(T::lit(100.0) * T::eps());

    let mut x = start.x.clone();
    let mut za = DVector::from_iterator(ma, active.iter().map(|&j| zi[j]));
    let mut ze = ze.clone();
    let mut best_norm = T::infinity();
    for _ in 0..30 {
        let p = Point::eval(problem, lambda, x.clone())?;
        let ja = DMatrix::from_fn(n, ma, |r, k| p.ji[(r, active[k])]);
        let mut zfull = DVector::zeros(p.ci.len());
        for (k, &j) in active.iter().enumerate() {
            zfull[j] = za[k];
        }
        let stat = p.lagrangian_gradient(&zfull, &ze);
        let ca = DVector::from_iterator(ma, active.iter().map(|&j| p.ci[j]));
        let mut rhs = DVector::zeros(n + ma + me);
        rhs.rows_mut(0, n).copy_from(&(-stat));
        rhs.rows_mut(n, ma).copy_from(&(-&ca));
        rhs.rows_mut(n + ma, me).copy_from(&(-&p.ce));
        let norm = inf_norm(&rhs);
        if norm <= target || norm >= best_norm {
            break;
        }
        best_norm = norm;

        let w = lagrangian_hessian(problem, lambda, &x, &zfull, &ze)?;
        let k = n + ma + me;
        let mut kkt = DMatrix::zeros(k, k);
        kkt.view_mut((0, 0), (n, n)).copy_from(&w);
        kkt.view_mut((0, n), (n, ma)).copy_from(&ja);
        kkt.view_mut((n, 0), (ma, n)).copy_from(&ja.transpose());
        kkt.view_mut((0, n + ma), (n, me)).copy_from(&p.je);
        kkt.view_mut((n + ma, 0), (me, n)).copy_from(&p.je.transpose());
        let Some(step) = solve_dense_vec(&kkt, &rhs) else {
            return Ok(None);
        };
        x += step.rows(0, n);
        za += step.rows(n, ma);
        ze += step.rows(n + ma, me);
        if x.iter().any(|v| !v.is_finite()) {
            return Ok(None);
        }
    }

    let p = Point::eval(problem, lambda, x)?;
    let mut zfull = DVector::zeros(p.ci.len());
    for (k, &j) in active.iter().enumerate() {
        zfull[j] = za[k];
    }
    let res = p.residual(&zfull, &ze);
    Ok((res.max() <= opts.tol_kkt).then_some((p, zfull, ze)))
}

fn damped_bfgs_update<T: Real>(b: &mut DMatrix<T>, s: &DVector<T>, y: &DVector<T>) {
    let bs = &*b * s;
    let sbs = s.dot(&bs);
    if !(sbs > T::eps() * s.norm_squared()) {
        return;
    }
    let sy = s.dot(y);
    let r = if sy >= T::lit(0.2) * sbs {
        y.clone()
    } else {
        let theta = T::lit(0.8) * sbs / (sbs - sy);
        y * theta + &bs * (T::one() - theta)
    };
    let sr = s.dot(&r);
    *b += &r * r.transpose() / sr - &bs * bs.transpose() / sbs;
}

/// SQP from `x0` for `min sum lambda_i f_i(x)` subject to the problem's constraints.
pub fn sqp<T: Real>(
    problem: &dyn MooProblem<T>,
    lambda: &WeightVector<T>,
    x0: &DVector<T>,
    opts: &SqpOptions<T>,
) -> Result<SqpResult<T>> {
    let l = lambda.as_vector();
    let n = problem.n();
    let (mi, me) = (problem.num_inequalities(), problem.num_equalities());
    let mut cur = Point::eval(problem, l, x0.clone())?;
    let mut zi = DVector::zeros(mi);
    let mut ze = DVector::zeros(me);
    let mut b = lagrangian_hessian(problem, l, &cur.x, &zi, &ze)?;
    if b.clone().cholesky().is_none() {
        b = DMatrix::identity(n, n);
    }
    let mut rho = T::one();
    let mut iterations = 0;
    let mut polish_tried_at = T::infinity();

    loop {
        let res = cur.residual(&zi, &ze);
        // sharpen once the iterate is close, and again after real progress
        if res.max() <= T::lit(1e-3) && res.max() < polish_tried_at * T::lit(0.1) {
            polish_tried_at = res.max();
            if let Some((p, pzi, pze)) = polish(problem, l, &cur, &zi, &ze, opts)? {
                let residual = p.residual(&pzi, &pze);
                return Ok(SqpResult {
                    x: p.x,
                    z_ineq: pzi,
                    z_eq: pze,
                    residual,
                    iterations,
                    converged: true,
                });
            }
        }
        if res.max() <= opts.tol_kkt {
            return Ok(SqpResult {
                x: cur.x,
                z_ineq: zi,
                z_eq: ze,
                residual: res,
                iterations,
                converged: true,
            });
        }
        if iterations >= opts.max_iter {
            return Ok(SqpResult {
                x: cur.x,
                z_ineq: zi,
                z_eq: ze,
                residual: res,
                iterations,
                converged: false,
            });
        }
        iterations += 1;

        // QP: J_E' d = -c_E and (-J_I)' d >= c_I, relaxing violated rows if inconsistent
        let neg_ji = -&cur.ji;
        let mut qp = None;
        for theta in [1.0, 0.5, 0.1, 0.0] {
            let t = T::lit(theta);
            let b_in = cur.ci.map(|c| if c > T::zero() { c * t } else { c });
            let b_eq = -&cur.ce * t;
            match solve_qp(&b, &cur.g, &cur.je, &b_eq, &neg_ji, &b_in) {
                Ok(s) => {
                    qp = Some(s);
                    break;
                }
                Err(Error::InfeasibleSubproblem) => continue,
                Err(e) => return Err(e),
            }
        }
        let qp = qp.ok_or(Error::InfeasibleSubproblem)?;
        let d = qp.d;
        let zi_new = qp.mu_in;
        let ze_new = -qp.mu_eq;

        let zmax = inf_norm(&zi_new).max(inf_norm(&ze_new));
        if rho < T::lit(1.5) * zmax {
            rho = T::lit(2.0) * zmax;
        }
        let phi0 = cur.f + rho * cur.violation();
        let slope = cur.g.dot(&d) - rho * cur.violation();
        let mut alpha = T::one();
        let mut next = None;
        for _ in 0..40 {
            let trial = cur.x.clone() + &d * alpha;
            match Point::eval(problem, l, trial) {
                Ok(p) => {
                    let phi = p.f + rho * p.violation();
                    if phi <= phi0 + T::lit(1e-4) * alpha * slope.min(T::zero()) {
                        next = Some(p);
                        break;
                    }
                }
                Err(Error::NonFiniteEvaluation(_)) => {}
                Err(e) => return Err(e),
            }
            alpha *= T::lit(0.5);
        }
        let Some(next) = next else {
            // no merit decrease: accept the multipliers and restart the model
            zi = zi_new;
            ze = ze_new;
            if d.norm() <= T::eps() * (T::one() + cur.x.norm()) {
                continue;
            }
            b = DMatrix::identity(n, n);
            continue;
        };
        let s = &next.x - &cur.x;
        let y = next.lagrangian_gradient(&zi_new, &ze_new) - cur.lagrangian_gradient(&zi_new, &ze_new);
        damped_bfgs_update(&mut b, &s, &y);
        zi = zi_new;
        ze = ze_new;
        cur = next;
    }
}
