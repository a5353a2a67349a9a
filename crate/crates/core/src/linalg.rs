//! Small dense linear algebra used by the sensitivity and solver code.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;

/// Singular values (descending) together with the pseudo-inverse built from them.
#[derive(Debug, Clone)]
pub struct PseudoInverse<T: Real> {
    pub pinv: DMatrix<T>,
    pub singular_values: DVector<T>,
    /// Number of singular values kept above the cutoff.
    pub rank: usize,
}

/// Default relative rank tolerance: `dim * eps`, applied as a multiple of `sigma_max`.
pub fn default_rank_tol<T: Real>(dim: usize) -> T {
    T::of_usize(dim.max(1)) * T::eps()
}

/// Moore-Penrose pseudo-inverse through the SVD.
///
/// Singular values `<= rank_tol * sigma_max` are treated as zero.
pub fn pseudo_inverse<T: Real>(m: &DMatrix<T>, rank_tol: T) -> PseudoInverse<T> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return PseudoInverse {
            pinv: DMatrix::zeros(cols, rows),
            singular_values: DVector::zeros(0),
            rank: 0,
        };
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let sv = svd.singular_values;
    let sigma_max = sv.iter().fold(T::zero(), |a, &s| a.max(s));
    let cutoff = rank_tol * sigma_max;

    let mut pinv = DMatrix::zeros(cols, rows);
    let mut rank = 0;
    for k in 0..sv.len() {
        let s = sv[k];
        if s > cutoff && s > T::zero() {
            rank += 1;
            let inv = T::one() / s;
            // pinv += v_k * inv * u_k^T
            for i in 0..cols {
                let vik = v_t[(k, i)] * inv;
                for j in 0..rows {
                    pinv[(i, j)] += vik * u[(j, k)];
                }
            }
        }
    }
    let mut sorted: Vec<T> = sv.iter().copied().collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    PseudoInverse {
        pinv,
        singular_values: DVector::from_vec(sorted),
        rank,
    }
}

/// Largest deviation in the two Penrose identities `A A+ A = A` and `A+ A A+ = A+`.
pub fn penrose_defect<T: Real>(a: &DMatrix<T>, pinv: &DMatrix<T>) -> T {
    let d1 = (a * pinv * a - a).amax();
    let d2 = (pinv * a * pinv - pinv).amax();
    d1.max(d2)
}

/// Solves `A X = B`, using Cholesky when `A` is symmetric positive definite and LU otherwise.
///
/// Returns `None` when `A` is numerically singular.
pub fn solve_dense<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> Option<DMatrix<T>> {
    let n = a.nrows();
    if n != a.ncols() || b.nrows() != n {
        return None;
    }
    if n == 0 {
        return Some(b.clone());
    }
    let scale = a.amax();
    if scale == T::zero() || !scale.is_finite() {
        return None;
    }
    let sym_tol = T::lit(1e3) * T::eps() * scale;
    let symmetric = (a - a.transpose()).amax() <= sym_tol;
    if symmetric {
        if let Some(ch) = a.clone().cholesky() {
            let l = ch.l_dirty();
            let min_diag = (0..n).map(|i| l[(i, i)].abs()).fold(T::infinity(), T::min);
            let max_diag = (0..n).map(|i| l[(i, i)].abs()).fold(T::zero(), T::max);
            // squared pivot ratio tracks the condition number of A
            if min_diag * min_diag > T::of_usize(n) * T::eps() * max_diag * max_diag {
                return Some(ch.solve(b));
            }
            return None;
        }
    }
    let lu = a.clone().full_piv_lu();
    let umat = lu.u();
    let piv_max = (0..n).map(|i| umat[(i, i)].abs()).fold(T::zero(), T::max);
    let piv_min = (0..n).map(|i| umat[(i, i)].abs()).fold(T::infinity(), T::min);
    if !(piv_min > T::of_usize(n) * T::eps() * piv_max) {
        return None;
    }
    lu.solve(b)
}

/// Vector flavour of [`solve_dense`].
pub fn solve_dense_vec<T: Real>(a: &DMatrix<T>, b: &DVector<T>) -> Option<DVector<T>> {
    let bm = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    solve_dense(a, &bm).map(|x| x.column(0).into_owned())
}

/// Largest absolute asymmetry `max |A - A^T|`.
pub fn symmetry_defect<T: Real>(a: &DMatrix<T>) -> T {
    if a.nrows() != a.ncols() {
        return T::infinity();
    }
    (a - a.transpose()).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_pinv_is_identity() {
        let id = DMatrix::<f64>::identity(3, 3);
        let p = pseudo_inverse(&id, default_rank_tol(3));
        assert_relative_eq!(p.pinv, id, epsilon = 1e-14);
        assert_eq!(p.rank, 3);
    }

    #[test]
    fn rank_deficient_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let p = pseudo_inverse(&m, default_rank_tol::<f64>(2));
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]);
        assert_relative_eq!(p.pinv, expected, epsilon = 1e-14);
        assert_eq!(p.rank, 1);
        assert_eq!(p.singular_values.as_slice(), &[2.0, 0.0]);
    }

    #[test]
    fn rank_two_penrose() {
        // outer-product construction guarantees rank 2
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -0.5, 0.3, 2.0, 1.0]);
        let b = DMatrix::from_row_slice(2, 3, &[0.7, -1.1, 0.2, 0.4, 0.9, -2.0]);
        let m = &a * &b;
        let p = pseudo_inverse(&m, default_rank_tol(3));
        assert_eq!(p.rank, 2);
        assert!(penrose_defect(&m, &p.pinv) < 1e-10);
    }

    #[test]
    fn rectangular_pinv_shape() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let p = pseudo_inverse(&m, default_rank_tol(3));
        assert_eq!(p.pinv.shape(), (3, 2));
        assert!(penrose_defect(&m, &p.pinv) < 1e-14);
    }

    #[test]
    fn zero_matrix_pinv_is_zero() {
        let m = DMatrix::<f64>::zeros(3, 3);
        let p = pseudo_inverse(&m, default_rank_tol(3));
        assert_eq!(p.rank, 0);
        assert_eq!(p.pinv.amax(), 0.0);
    }

    #[test]
    fn solve_spd_and_general() {
        let spd = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        let x = solve_dense_vec(&spd, &b).unwrap();
        assert_relative_eq!(&spd * &x, b, epsilon = 1e-14);

        let gen = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 0.0]);
        let b3 = DVector::from_vec(vec![1.0, -1.0, 0.5]);
        let x3 = solve_dense_vec(&gen, &b3).unwrap();
        assert_relative_eq!(&gen * &x3, b3, epsilon = 1e-14);
    }

    #[test]
    fn singular_solve_is_none() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(solve_dense_vec(&m, &DVector::from_vec(vec![1.0, 1.0])).is_none());
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(solve_dense_vec(&z, &DVector::from_vec(vec![1.0, 1.0])).is_none());
    }

    #[test]
    fn works_in_single_precision() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0f32, 0.0, 0.0, 0.5]);
        let p = pseudo_inverse(&m, default_rank_tol(2));
        assert!((p.pinv[(1, 1)] - 2.0).abs() < 1e-5);
    }
}
