//! Dense strictly convex QP by the Goldfarb-Idnani dual active-set method.
//!
//! Solves `min 1/2 d'Hd + g'd` subject to `A_eq' d = b_eq` and `A_in' d >= b_in`,
//! where constraint normals are the columns of `A_eq` / `A_in`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct QpSolution<T: Real> {
    pub d: DVector<T>,
    /// Multipliers with `H d + g = A_eq mu_eq + A_in mu_in`, `mu_in >= 0`.
    pub mu_eq: DVector<T>,
    pub mu_in: DVector<T>,
    /// Indices of inequalities in the final active set.
    pub active: Vec<usize>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Row {
    Eq(usize),
    In(usize),
}

struct Qp<'a, T: Real> {
    a_eq: &'a DMatrix<T>,
    b_eq: &'a DVector<T>,
    a_in: &'a DMatrix<T>,
    b_in: &'a DVector<T>,
    /// `+1` or `-1` per equality, chosen so the equality is approached as `>=`.
    eq_sign: Vec<T>,
}

impl<T: Real> Qp<'_, T> {
    fn normal(&self, r: Row) -> DVector<T> {
        match r {
            Row::Eq(j) => self.a_eq.column(j) * self.eq_sign[j],
            Row::In(j) => self.a_in.column(j).into_owned(),
        }
    }

    fn slack(&self, r: Row, d: &DVector<T>) -> T {
        match r {
            Row::Eq(j) => self.eq_sign[j] * (self.a_eq.column(j).dot(d) - self.b_eq[j]),
            Row::In(j) => self.a_in.column(j).dot(d) - self.b_in[j],
        }
    }

    fn scale(&self, r: Row) -> T {
        match r {
            Row::Eq(j) => T::one() + self.b_eq[j].abs() + self.a_eq.column(j).norm(),
            Row::In(j) => T::one() + self.b_in[j].abs() + self.a_in.column(j).norm(),
        }
    }
}

/// Solves the QP. `h` must be symmetric positive definite.
pub fn solve_qp<T: Real>(
    h: &DMatrix<T>,
    g: &DVector<T>,
    a_eq: &DMatrix<T>,
    b_eq: &DVector<T>,
    a_in: &DMatrix<T>,
    b_in: &DVector<T>,
) -> Result<QpSolution<T>> {
    let n = g.len();
    let (me, mi) = (a_eq.ncols(), a_in.ncols());
    let chol = h.clone().cholesky().ok_or(Error::SingularHessianModel)?;
    let h_inv = chol.inverse();
    let tol = T::lit(1e3) * T::eps();

    let mut qp = Qp {
        a_eq,
        b_eq,
        a_in,
        b_in,
        eq_sign: vec![T::one(); me],
    };
    let mut d = -(&h_inv * g);
    let mut active: Vec<Row> = Vec::new();
    let mut u: Vec<T> = Vec::new();
    let max_iter = 10 * (n + me + mi) + 50;
    let mut iterations = 0;

    // (z, r): primal step direction and dual change for adding normal `np`
    let directions = |active: &[Row], qp: &Qp<T>, np: &DVector<T>| -> Result<(DVector<T>, DVector<T>)> {
        let w = &h_inv * np;
        if active.is_empty() {
            return Ok((w, DVector::zeros(0)));
        }
        let nmat = DMatrix::from_columns(&active.iter().map(|&r| qp.normal(r)).collect::<Vec<_>>());
        let m = nmat.transpose() * &h_inv * &nmat;
        let r = solve_dense(
            &m,
            &DMatrix::from_column_slice(active.len(), 1, (nmat.transpose() * &w).as_slice()),
        )
        .ok_or(Error::InfeasibleSubproblem)?
        .column(0)
        .into_owned();
        let z = w - &h_inv * &nmat * &r;
        Ok((z, r))
    };

    let mut pending_eq: Vec<usize> = (0..me).rev().collect();
    loop {
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::InfeasibleSubproblem);
        }
        // choose constraint to add: pending equalities first, then most violated inequality
        let p = if let Some(j) = pending_eq.pop() {
            let s = a_eq.column(j).dot(&d) - b_eq[j];
            qp.eq_sign[j] = if s > T::zero() { -T::one() } else { T::one() };
            Row::Eq(j)
        } else {
            let mut worst: Option<(Row, T)> = None;
            for j in 0..mi {
                if active.contains(&Row::In(j)) {
                    continue;
                }
                let r = Row::In(j);
                let s = qp.slack(r, &d) / qp.scale(r);
                if s < -tol && worst.is_none_or(|(_, w)| s < w) {
                    worst = Some((r, s));
                }
            }
            match worst {
                Some((r, _)) => r,
                None => break,
            }
        };

        let np = qp.normal(p);
        let mut up = T::zero();
        loop {
            let (z, r) = directions(&active, &qp, &np)?;
            // dual step limit from active inequalities
            let mut t1 = T::infinity();
            let mut drop_k = None;
            for (k, (&row, &rk)) in active.iter().zip(r.iter()).enumerate() {
                if matches!(row, Row::In(_)) && rk > T::zero() {
                    let ratio = u[k] / rk;
                    if ratio < t1 {
                        t1 = ratio;
                        drop_k = Some(k);
                    }
                }
            }
            let zn = z.dot(&np);
            let slack = qp.slack(p, &d);
            let degenerate = z.norm() <= tol * np.norm().max(T::one());
            let t2 = if degenerate { T::infinity() } else { -slack / zn };
            if degenerate && matches!(p, Row::Eq(_)) && slack.abs() <= tol * qp.scale(p) {
                // linearly dependent equality already satisfied
                break;
            }
            let t = t1.min(t2);
            if !t.is_finite() {
                return Err(Error::InfeasibleSubproblem);
            }
            if !degenerate {
                d += &z * t;
            }
            for (k, uk) in u.iter_mut().enumerate() {
                *uk -= t * r[k];
            }
            up += t;
            if t2 <= t1 {
                active.push(p);
                u.push(up);
                break;
            }
            let k = drop_k.expect("finite dual step has a blocking constraint");
            active.remove(k);
            u.remove(k);
        }
    }

    let mut mu_eq = DVector::zeros(me);
    let mut mu_in = DVector::zeros(mi);
    let mut act = Vec::new();
    for (&row, &uk) in active.iter().zip(&u) {
        match row {
            Row::Eq(j) => mu_eq[j] = uk * qp.eq_sign[j],
            Row::In(j) => {
                mu_in[j] = uk;
                act.push(j);
            }
        }
    }
    act.sort_unstable();
    Ok(QpSolution {
        d,
        mu_eq,
        mu_in,
        active: act,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn unconstrained_minimum() {
        let h = DMatrix::identity(2, 2) * 2.0;
        let s = solve_qp(
            &h,
            &col(&[-2.0, 4.0]),
            &DMatrix::zeros(2, 0),
            &col(&[]),
            &DMatrix::zeros(2, 0),
            &col(&[]),
        )
        .unwrap();
        assert!((s.d - col(&[1.0, -2.0])).norm() < 1e-12);
    }

    #[test]
    fn active_bound() {
        // min (d1-2)^2 + d2^2 s.t. -d1 >= -0.5
        let h = DMatrix::identity(2, 2) * 2.0;
        let a_in = DMatrix::from_column_slice(2, 1, &[-1.0, 0.0]);
        let s = solve_qp(
            &h,
            &col(&[-4.0, 0.0]),
            &DMatrix::zeros(2, 0),
            &col(&[]),
            &a_in,
            &col(&[-0.5]),
        )
        .unwrap();
        assert!((s.d - col(&[0.5, 0.0])).norm() < 1e-12);
        assert!((s.mu_in[0] - 3.0).abs() < 1e-12);
        assert_eq!(s.active, vec![0]);
    }

    #[test]
    fn equality_and_drop() {
        // min |d|^2/2 s.t. d1 + d2 = 1, d1 >= 0, d2 >= 0.8
        let h = DMatrix::identity(2, 2);
        let a_eq = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let a_in = DMatrix::identity(2, 2);
        let s = solve_qp(&h, &col(&[0.0, 0.0]), &a_eq, &col(&[1.0]), &a_in, &col(&[0.0, 0.8])).unwrap();
        assert!((&s.d - col(&[0.2, 0.8])).norm() < 1e-12);
        // stationarity
        let res = &s.d - &a_eq * &s.mu_eq - &a_in * &s.mu_in;
        assert!(res.norm() < 1e-12);
        assert!(s.mu_in.iter().all(|&m| m >= -1e-14));
    }

    #[test]
    fn infeasible() {
        let h = DMatrix::identity(1, 1);
        let a_in = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let r = solve_qp(
            &h,
            &col(&[0.0]),
            &DMatrix::zeros(1, 0),
            &col(&[]),
            &a_in,
            &col(&[1.0, 0.0]),
        );
        assert!(matches!(r, Err(Error::InfeasibleSubproblem)));
    }

    #[test]
    fn rejects_indefinite_model() {
        let h = DMatrix::from_diagonal(&col(&[1.0, -1.0]));
        let r = solve_qp(
            &h,
            &col(&[0.0, 0.0]),
            &DMatrix::zeros(2, 0),
            &col(&[]),
            &DMatrix::zeros(2, 0),
            &col(&[]),
        );
        assert!(matches!(r, Err(Error::SingularHessianModel)));
    }
}
