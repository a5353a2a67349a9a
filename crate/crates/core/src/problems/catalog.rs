//! Analytic test problems.

use nalgebra::{DMatrix, DVector};

use super::{FunctionEval, MooProblem, Order};
use crate::scalar::Real;

fn lit<T: Real>(v: f64) -> T {
    T::lit(v)
}

/// `f_j(x) = (x_j - 1)^2 + sum_{i != j} x_i^2`, `j < q`, on `R^n` with `q <= n`.
///
/// `ZLT1` is the `n = q = 3` instance.
#[derive(Debug, Clone)]
pub struct Zlt1q {
    name: &'static str,
    n: usize,
    q: usize,
}

impl Zlt1q {
    pub fn zlt1() -> Self {
        Self {
            name: "ZLT1",
            n: 3,
            q: 3,
        }
    }

    /// Panics unless `2 <= q <= n`; the registry validates user input first.
    pub fn new(n: usize, q: usize) -> Self {
        assert!(q >= 2 && q <= n, "ZLT1q needs 2 <= q <= n");
        Self { name: "ZLT1q", n, q }
    }
}

impl<T: Real> MooProblem<T> for Zlt1q {
    fn name(&self) -> &str {
        self.name
    }
    fn n(&self) -> usize {
        self.n
    }
    fn q(&self) -> usize {
        self.q
    }
    fn params(&self) -> Vec<(&'static str, f64)> {
        if self.name == "ZLT1" {
            Vec::new()
        } else {
            vec![("nbar", self.n as f64), ("qbar", self.q as f64)]
        }
    }

    fn objective(&self, i: usize, x: &DVector<T>, order: Order) -> FunctionEval<T> {
        let two = lit::<T>(2.0);
        let value = x.norm_squared() - two * x[i] + T::one();
        FunctionEval::build(
            order,
            value,
            || {
                let mut g = x * two;
                g[i] -= two;
                g
            },
            || DMatrix::identity(self.n, self.n) * two,
        )
    }
}

/// Three convex quadratics `f_i = 0.5 x^T Q_i x + b_i^T x` on `R^2` with published data.
#[derive(Debug, Clone, Default)]
pub struct Grv1;

impl Grv1 {
    const Q: [[f64; 4]; 3] = [
        [50.82, -0.23, -0.23, 10.57],
        [38.25, 12.19, 12.19, 6.53],
        [45.10, -9.55, -9.55, 9.91],
    ];
    const B: [[f64; 2]; 3] = [[-1.87, -4.75], [3.66, 2.99], [-0.78, 0.78]];

    /// Hessian of objective `i`.
    pub fn hessian<T: Real>(i: usize) -> DMatrix<T> {
        DMatrix::from_row_slice(2, 2, &Self::Q[i].map(lit::<T>))
    }

    pub fn linear_term<T: Real>(i: usize) -> DVector<T> {
        DVector::from_row_slice(&Self::B[i].map(lit::<T>))
    }
}

impl<T: Real> MooProblem<T> for Grv1 {
    fn name(&self) -> &str {
        "GRV1"
    }
    fn n(&self) -> usize {
        2
    }
    fn q(&self) -> usize {
        3
    }
    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("nbar", 1.0)]
    }

    fn objective(&self, i: usize, x: &DVector<T>, order: Order) -> FunctionEval<T> {
        let h = Self::hessian::<T>(i);
        let b = Self::linear_term::<T>(i);
        let hx = &h * x;
        let value = lit::<T>(0.5) * x.dot(&hx) + b.dot(x);
        FunctionEval::build(order, value, || hx + &b, || h.clone())
    }
}

/// `f1 = x1^2 + (x2-1)^2`, `f2 = x1^2 + (x2+1)^2 + 1`, `f3 = (x1-1)^2 + x2^2 + 2`.
///
/// The constrained variant adds `x1^2 + x2^2 <= 0.8` and `(x1-1)^2 + x2^2 <= 1`.
#[derive(Debug, Clone)]
pub struct Vfm1 {
    constrained: bool,
}

impl Vfm1 {
    pub fn unconstrained() -> Self {
        Self { constrained: false }
    }

    pub fn constrained() -> Self {
        Self { constrained: true }
    }

    // (center, offset) of each objective: f = |x - center|^2 + offset
    const OBJ: [([f64; 2], f64); 3] = [([0.0, 1.0], 0.0), ([0.0, -1.0], 1.0), ([1.0, 0.0], 2.0)];
    // (center, radius^2) of each disk constraint
    const CON: [([f64; 2], f64); 2] = [([0.0, 0.0], 0.8), ([1.0, 0.0], 1.0)];

    fn shifted_square<T: Real>(x: &DVector<T>, center: [f64; 2], offset: f64, order: Order) -> FunctionEval<T> {
        let c = DVector::from_row_slice(&center.map(lit::<T>));
        let d = x - &c;
        let two = lit::<T>(2.0);
        FunctionEval::build(
            order,
            d.norm_squared() + lit::<T>(offset),
            || d * two,
            || DMatrix::identity(2, 2) * two,
        )
    }
}

impl<T: Real> MooProblem<T> for Vfm1 {
    fn name(&self) -> &str {
        if self.constrained {
            "VFM1constr"
        } else {
            "VFM1"
        }
    }
    fn n(&self) -> usize {
        2
    }
    fn q(&self) -> usize {
        3
    }
    fn num_inequalities(&self) -> usize {
        if self.constrained {
            2
        } else {
            0
        }
    }

    fn objective(&self, i: usize, x: &DVector<T>, order: Order) -> FunctionEval<T> {
        let (center, offset) = Self::OBJ[i];
        Self::shifted_square(x, center, offset, order)
    }

    fn inequality(&self, j: usize, x: &DVector<T>, order: Order) -> FunctionEval<T> {
        assert!(self.constrained && j < 2);
        let (center, r2) = Self::CON[j];
        Self::shifted_square(x, center, -r2, order)
    }
}

/// `f1 = (1/n) sum x_i^2 + 0.5 sum x_i^4`, `f2` the same around `x_i = 2`.
#[derive(Debug, Clone)]
pub struct Grv2 {
    n: usize,
}

impl Grv2 {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        Self { n }
    }
}

impl<T: Real> MooProblem<T> for Grv2 {
    fn name(&self) -> &str {
        "GRV2"
    }
    fn n(&self) -> usize {
        self.n
    }
    fn q(&self) -> usize {
        2
    }
    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("nbar", self.n as f64)]
    }

    fn objective(&self, i: usize, x: &DVector<T>, order: Order) -> FunctionEval<T> {
        let shift = if i == 0 { T::zero() } else { lit::<T>(2.0) };
        let inv_n = T::one() / T::of_usize(self.n);
        let half = lit::<T>(0.5);
        let two = lit::<T>(2.0);
        let six = lit::<T>(6.0);
        let d = x.map(|v| v - shift);
        let value = d.iter().map(|&v| inv_n * v * v + half * v * v * v * v).sum();
        FunctionEval::build(
            order,
            value,
            || d.map(|v| two * inv_n * v + two * v * v * v),
            || DMatrix::from_diagonal(&d.map(|v| two * inv_n + six * v * v)),
        )
    }
}

/// Five variables, two objectives, one inequality and two equalities.
#[derive(Debug, Clone, Default)]
pub struct Das1;

impl<T: Real> MooProblem<T> for Das1 {
    fn name(&self) -> &str {
        "DAS1"
    }
    fn n(&self) -> usize {
        5
    }
    fn q(&self) -> usize {
        2
    }
    fn num_inequalities(&self) -> usize {
        1
    }
    fn num_equalities(&self) -> usize {
        2
    }

    fn objective(&self, i: usize, x: &DVector<T>, order: Order) -> FunctionEval<T> {
        let two = lit::<T>(2.0);
        match i {
            0 => FunctionEval::build(order, x.norm_squared(), || x * two, || DMatrix::identity(5, 5) * two),
            _ => {
                let d = x[3] - x[4];
                let k = lit::<T>(0.01);
                let value = lit::<T>(3.0) * x[0] + two * x[1] - x[2] / lit::<T>(3.0) + k * d * d * d;
                FunctionEval::build(
                    order,
                    value,
                    || {
                        let g = lit::<T>(0.03) * d * d;
                        DVector::from_row_slice(&[lit(3.0), two, -T::one() / lit::<T>(3.0), g, -g])
                    },
                    || {
                        let s = lit::<T>(0.06) * d;
                        let mut h = DMatrix::zeros(5, 5);
                        h[(3, 3)] = s;
                        h[(4, 4)] = s;
                        h[(3, 4)] = -s;
                        h[(4, 3)] = -s;
                        h
                    },
                )
            }
        }
    }

    fn inequality(&self, j: usize, x: &DVector<T>, order: Order) -> FunctionEval<T> {
        assert_eq!(j, 0);
        let two = lit::<T>(2.0);
        FunctionEval::build(
            order,
            x.norm_squared() - lit::<T>(10.0),
            || x * two,
            || DMatrix::identity(5, 5) * two,
        )
    }

    fn equality(&self, j: usize, x: &DVector<T>, order: Order) -> FunctionEval<T> {
        match j {
            0 => {
                let a = DVector::from_row_slice(&[1.0, 2.0, -1.0, -0.5, 1.0].map(lit::<T>));
                FunctionEval::build(order, a.dot(x) - lit::<T>(2.0), || a.clone(), || DMatrix::zeros(5, 5))
            }
            _ => {
                let value = lit::<T>(4.0) * x[0] - lit::<T>(2.0) * x[1]
                    + lit::<T>(0.8) * x[2]
                    + lit::<T>(0.6) * x[3]
                    + lit::<T>(0.5) * x[4] * x[4];
                FunctionEval::build(
                    order,
                    value,
                    || DVector::from_row_slice(&[lit(4.0), lit(-2.0), lit(0.8), lit(0.6), x[4]]),
                    || {
                        let mut h = DMatrix::zeros(5, 5);
                        h[(4, 4)] = T::one();
                        h
                    },
                )
            }
        }
    }
}

/// Bi-objective problem with a bump in `x_1`, bounds `0 <= x_j <= r` as `2n` inequalities.
#[derive(Debug, Clone)]
pub struct Do2dk {
    n: usize,
    r: f64,
}

impl Do2dk {
    pub fn new(n: usize, r: f64) -> Self {
        assert!(n >= 2 && r > 0.0);
        Self { n, r }
    }

    pub fn bound(&self) -> f64 {
        self.r
    }

    /// `g2(x1)` and its first two derivatives.
    fn g2<T: Real>(x1: T) -> [T; 3] {
        let pi = T::pi();
        let sqrt2 = lit::<T>(2.0).sqrt();
        let two_pi_x = lit::<T>(2.0) * pi * x1;
        let dx = x1 - lit::<T>(0.5);
        [
            lit::<T>(5.0) + lit::<T>(10.0) * dx * dx + two_pi_x.cos() * sqrt2,
            lit::<T>(20.0) * dx - lit::<T>(2.0) * pi * sqrt2 * two_pi_x.sin(),
            lit::<T>(20.0) - lit::<T>(4.0) * pi * pi * sqrt2 * two_pi_x.cos(),
        ]
    }

    /// Shape factor: `sin(pi x1/2 + pi) + 1` for objective 0, `cos(...) + 1` for objective 1.
    fn shape<T: Real>(i: usize, x1: T) -> [T; 3] {
        let w = T::pi() / lit::<T>(2.0);
        let (s, c) = (w * x1).sin_cos();
        if i == 0 {
            [T::one() - s, -w * c, w * w * s]
        } else {
            [T::one() - c, w * s, w * w * c]
        }
    }
}

impl<T: Real> MooProblem<T> for Do2dk {
    fn name(&self) -> &str {
        "DO2DK"
    }
    fn n(&self) -> usize {
        self.n
    }
    fn q(&self) -> usize {
        2
    }
    fn num_inequalities(&self) -> usize {
        2 * self.n
    }
    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("n", self.n as f64), ("r", self.r)]
    }

    fn objective(&self, i: usize, x: &DVector<T>, order: Order) -> FunctionEval<T> {
        let n = self.n;
        let slope = lit::<T>(9.0) / T::of_usize(n - 1);
        let g1 = T::one() + slope * x.rows(1, n - 1).sum();
        let [g, dg, ddg] = Self::g2(x[0]);
        let [s, ds, dds] = Self::shape(i, x[0]);
        // h(x1) = g2 * shape, f = g1 * h
        let h = g * s;
        let dh = dg * s + g * ds;
        let ddh = ddg * s + lit::<T>(2.0) * dg * ds + g * dds;
        FunctionEval::build(
            order,
            g1 * h,
            || {
                let mut grad = DVector::from_element(n, slope * h);
                grad[0] = g1 * dh;
                grad
            },
            || {
                let mut hess = DMatrix::zeros(n, n);
                hess[(0, 0)] = g1 * ddh;
                for k in 1..n {
                    hess[(0, k)] = slope * dh;
                    hess[(k, 0)] = slope * dh;
                }
                hess
            },
        )
    }

    fn inequality(&self, j: usize, x: &DVector<T>, order: Order) -> FunctionEval<T> {
        let n = self.n;
        let (k, sign, offset) = if j < n {
            (j, -T::one(), T::zero())
        } else {
            (j - n, T::one(), -lit::<T>(self.r))
        };
        FunctionEval::build(
            order,
            sign * x[k] + offset,
            || {
                let mut g = DVector::zeros(n);
                g[k] = sign;
                g
            },
            || DMatrix::zeros(n, n),
        )
    }
}
