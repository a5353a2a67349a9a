//! Weighted-sum scalarization over the unit simplex.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problems::{evaluate, MooProblem, Order};
use crate::scalar::Real;

/// Feasibility tolerance for simplex membership.
pub fn simplex_tol<T: Real>() -> T {
    T::lit(1e-12).max(T::lit(16.0) * T::eps())
}

/// A point of the unit simplex: nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T: Real>(DVector<T>);

impl<T: Real> WeightVector<T> {
    /// Validates `lambda` against the simplex constraints.
    pub fn new(lambda: DVector<T>) -> Result<Self> {
        let tol = simplex_tol::<T>();
        if lambda.len() < 2 {
            return Err(Error::InfeasibleWeights(format!(
                "need at least 2 weights, got {}",
                lambda.len()
            )));
        }
        if lambda.iter().any(|v| !v.is_finite() || *v < -tol) {
            return Err(Error::InfeasibleWeights(format!(
                "negative or non-finite entry in {:?}",
                lambda.as_slice()
            )));
        }
        let sum: T = lambda.iter().copied().sum();
        if (sum - T::one()).abs() > tol {
            return Err(Error::InfeasibleWeights(format!("weights sum to {sum}")));
        }
        Ok(Self(lambda))
    }

    pub fn from_slice(lambda: &[T]) -> Result<Self> {
        Self::new(DVector::from_row_slice(lambda))
    }

    /// The simplex point closest to `v`.
    pub fn projected(v: &DVector<T>) -> Self {
        project_simplex(v)
    }

    /// Arithmetic mean of several weight vectors (again in the simplex).
    pub fn centroid(points: &[WeightVector<T>]) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidInput("centroid of an empty set".into()))?;
        let mut acc = DVector::zeros(first.len());
        for p in points {
            if p.len() != first.len() {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    got: p.len(),
                });
            }
            acc += p.as_vector();
        }
        Ok(project_simplex(&(acc / T::of_usize(points.len()))))
    }

    pub fn as_vector(&self) -> &DVector<T> {
        &self.0
    }

    pub fn as_slice(&self) -> &[T] {
        self.0.as_slice()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> DVector<T> {
        self.0
    }

    /// True when every weight is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|v| *v > T::zero())
    }
}

/// Weighted objective `sum lambda_i f_i(x)` with requested derivatives.
#[derive(Debug, Clone)]
pub struct WeightedSum<T: Real> {
    pub value: T,
    pub gradient: Option<DVector<T>>,
    pub hessian: Option<DMatrix<T>>,
}

pub fn weighted_sum<T: Real>(
    problem: &dyn MooProblem<T>,
    lambda: &WeightVector<T>,
    x: &DVector<T>,
    order: Order,
) -> Result<WeightedSum<T>> {
    if lambda.len() != problem.q() {
        return Err(Error::DimensionMismatch {
            expected: problem.q(),
            got: lambda.len(),
        });
    }
    let e = evaluate(problem, x, order)?;
    let l = lambda.as_vector();
    let value = e.values.dot(l);
    let gradient = e.gradients.map(|g| g * l);
    let hessian = e.hessians.map(|hs| {
        let n = problem.n();
        hs.iter()
            .zip(l.iter())
            .fold(DMatrix::zeros(n, n), |acc, (h, &w)| acc + h * w)
    });
    Ok(WeightedSum {
        value,
        gradient,
        hessian,
    })
}

/// Euclidean projection onto the unit simplex (sort-and-threshold).
pub fn project_simplex<T: Real>(v: &DVector<T>) -> WeightVector<T> {
    let q = v.len();
    assert!(q >= 1, "cannot project an empty vector");
    let mut u: Vec<T> = v.iter().copied().collect();
    u.sort_by(|a, b| b.partial_cmp(a).expect("finite input"));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - T::one()) / T::of_usize(k + 1);
        if uk - t > T::zero() {
            theta = t;
        }
    }
    let mut out = v.map(|x| (x - theta).max(T::zero()));
    // absorb rounding so the result satisfies the sum-to-one invariant tightly
    let sum: T = out.iter().copied().sum();
    if sum > T::zero() {
        out /= sum;
    }
    WeightVector(out)
}

/// A uniform discretization of the simplex: all compositions `k / K` with `sum k = K`.
#[derive(Debug, Clone)]
pub struct SimplexGrid<T: Real> {
    step: T,
    divisions: usize,
    compositions: Vec<Vec<usize>>,
    points: Vec<WeightVector<T>>,
}

impl<T: Real> SimplexGrid<T> {
    pub fn step(&self) -> T {
        self.step
    }

    /// `K = 1 / step`.
    pub fn divisions(&self) -> usize {
        self.divisions
    }

    pub fn q(&self) -> usize {
        self.compositions.first().map_or(0, Vec::len)
    }

    pub fn points(&self) -> &[WeightVector<T>] {
        &self.points
    }

    /// Integer compositions behind each point.
    pub fn compositions(&self) -> &[Vec<usize>] {
        &self.compositions
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `lambda_1,...,lambda_q` and one row per grid point.
    pub fn to_csv(&self) -> String {
        let q = self.q();
        let mut s = (1..=q).map(|i| format!("lambda_{i}")).collect::<Vec<_>>().join(",");
        s.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.as_slice().iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=total {
        prefix.push(k);
        compositions(total - k, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// Builds the grid `{k / K : k in N^q, sum k = K}` with `K = round(1 / step)`.
///
/// Consecutive points differ by one unit moved between two coordinates
/// whenever only the last two coordinates change.
pub fn simplex_grid<T: Real>(q: usize, step: f64) -> Result<SimplexGrid<T>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidGridStep(step));
    }
    if q < 2 {
        return Err(Error::InvalidInput(format!("grid needs q >= 2, got {q}")));
    }
    let k_real = 1.0 / step;
    let k = k_real.round();
    if (k_real - k).abs() > 1e-9 * k.max(1.0) || k < 1.0 {
        return Err(Error::InvalidGridStep(step));
    }
    let k = k as usize;
    let mut comps = Vec::new();
    compositions(k, q, &mut Vec::with_capacity(q), &mut comps);
    let kt = T::of_usize(k);
    let points = comps
        .iter()
        .map(|c| WeightVector(DVector::from_iterator(q, c.iter().map(|&ci| T::of_usize(ci) / kt))))
        .collect();
    Ok(SimplexGrid {
        step: T::lit(step),
        divisions: k,
        compositions: comps,
        points,
    })
}

/// Grid spacing used when none is given: 0.01 for q=2, 0.02 for q=3, 0.05 for q=4, 0.1 beyond.
pub fn default_grid_step(q: usize) -> f64 {
    match q {
        0..=2 => 0.01,
        3 => 0.02,
        4 => 0.05,
        _ => 0.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Vfm1, Zlt1q};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn w(xs: &[f64]) -> WeightVector<f64> {
        WeightVector::from_slice(xs).unwrap()
    }

    fn dv(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn weight_validation() {
        assert!(WeightVector::from_slice(&[0.5, 0.5]).is_ok());
        assert!(WeightVector::from_slice(&[0.6, 0.5]).is_err());
        assert!(WeightVector::from_slice(&[1.2, -0.2]).is_err());
        assert!(WeightVector::from_slice(&[1.0]).is_err());
    }

    #[test]
    fn weighted_sum_examples() {
        let p = Zlt1q::zlt1();
        let ws = weighted_sum(&p, &w(&[1.0, 0.0, 0.0]), &dv(&[1.0, 0.0, 0.0]), Order::Gradient).unwrap();
        assert_eq!(ws.value, 0.0);
        assert_eq!(ws.gradient.unwrap().as_slice(), &[0.0, 0.0, 0.0]);

        let t = 1.0 / 3.0;
        let ws = weighted_sum(&p, &w(&[t, t, t]), &dv(&[t, t, t]), Order::Gradient).unwrap();
        assert!(ws.gradient.unwrap().amax() < 1e-15);

        let ws = weighted_sum(
            &Vfm1::unconstrained(),
            &w(&[0.4, 0.2, 0.4]),
            &dv(&[0.4, 0.2]),
            Order::Hessian,
        )
        .unwrap();
        assert!(ws.gradient.unwrap().amax() < 1e-15);
        assert_relative_eq!(ws.hessian.unwrap(), DMatrix::identity(2, 2) * 2.0, epsilon = 1e-15);
    }

    #[test]
    fn projection_examples() {
        assert_relative_eq!(
            project_simplex(&dv(&[0.6, 0.6])).into_inner(),
            dv(&[0.5, 0.5]),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            project_simplex(&dv(&[2.0, 0.0])).into_inner(),
            dv(&[1.0, 0.0]),
            epsilon = 1e-15
        );
        let feasible = dv(&[0.2, 0.3, 0.5]);
        assert_relative_eq!(project_simplex(&feasible).into_inner(), feasible, epsilon = 1e-15);
    }

    #[test]
    fn grid_counts() {
        let g = simplex_grid::<f64>(2, 0.5).unwrap();
        let pts: Vec<Vec<f64>> = g.points().iter().map(|p| p.as_slice().to_vec()).collect();
        assert_eq!(pts, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
        assert_eq!(simplex_grid::<f64>(3, 0.5).unwrap().len(), 6);
        assert_eq!(simplex_grid::<f64>(5, 0.1).unwrap().len(), 1001);
        assert_eq!(simplex_grid::<f64>(3, 0.02).unwrap().len(), 1326);
        assert_eq!(simplex_grid::<f64>(2, 0.01).unwrap().len(), 101);
    }

    #[test]
    fn grid_rejects_bad_steps() {
        for s in [0.0, -0.1, 1.5, 0.3, f64::NAN] {
            assert!(simplex_grid::<f64>(3, s).is_err(), "step {s}");
        }
    }

    #[test]
    fn grid_csv_header() {
        let csv = simplex_grid::<f64>(3, 0.5).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("lambda_1,lambda_2,lambda_3"));
        assert_eq!(lines.count(), 6);
    }

    #[test]
    fn centroid_of_vertices() {
        let c = WeightVector::centroid(&[w(&[1.0, 0.0, 0.0]), w(&[0.0, 1.0, 0.0]), w(&[0.0, 0.0, 1.0])]).unwrap();
        for v in c.as_slice() {
            assert_relative_eq!(*v, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn grid_points_are_feasible_and_distinct() {
        let g = simplex_grid::<f64>(4, 0.125).unwrap();
        for p in g.points() {
            assert!(WeightVector::new(p.as_vector().clone()).is_ok());
        }
        let mut c = g.compositions().to_vec();
        c.sort();
        c.dedup();
        assert_eq!(c.len(), g.len());
    }

    proptest! {
        #[test]
        fn projection_is_feasible_and_idempotent(v in prop::collection::vec(-3.0f64..3.0, 2..6)) {
            let p = project_simplex(&DVector::from_vec(v));
            prop_assert!(WeightVector::new(p.as_vector().clone()).is_ok());
            let again = project_simplex(p.as_vector());
            prop_assert!((again.as_vector() - p.as_vector()).amax() < 1e-14);
        }

        #[test]
        fn weighted_gradient_is_linear(
            raw in prop::collection::vec(0.0f64..1.0, 3),
            x in prop::collection::vec(-2.0f64..2.0, 3),
        ) {
            let lam = project_simplex(&DVector::from_vec(raw));
            let x = DVector::from_vec(x);
            let p = Zlt1q::zlt1();
            let ws = weighted_sum(&p, &lam, &x, Order::Gradient).unwrap();
            let e = evaluate(&p, &x, Order::Gradient).unwrap();
            let g = e.gradients.unwrap();
            let mut manual = DVector::zeros(3);
            for i in 0..3 {
                manual += g.column(i) * lam.as_slice()[i];
            }
            prop_assert!((ws.gradient.unwrap() - manual).amax() <= 1e-14);
        }
    }
}
