//! Quasi-Newton (BFGS) minimization with a strong-Wolfe line search.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions<T: Real> {
    /// Stop when the gradient 2-norm drops to this value.
    pub tol_grad: T,
    pub max_iter: usize,
    /// Sufficient-decrease constant.
    pub c1: T,
    /// Curvature constant.
    pub c2: T,
}

impl<T: Real> Default for BfgsOptions<T> {
    fn default() -> Self {
        Self {
            tol_grad: T::lit(1e-8).max(T::lit(100.0) * T::eps()),
            max_iter: 500,
            c1: T::lit(1e-4),
            c2: T::lit(0.9),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult<T: Real> {
    pub x: DVector<T>,
    pub value: T,
    pub gradient: DVector<T>,
    pub grad_norm: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

struct Probe<T: Real> {
    alpha: T,
    value: T,
    slope: T,
    x: DVector<T>,
    grad: DVector<T>,
}

/// Objective wrapper counting evaluations; non-finite values become `+inf`.
struct Counted<T, F> {
    f: F,
    evals: usize,
    _t: std::marker::PhantomData<T>,
}

impl<T: Real, F> Counted<T, F>
where
    F: FnMut(&DVector<T>) -> Result<(T, DVector<T>)>,
{
    fn eval(&mut self, x: &DVector<T>) -> Result<(T, DVector<T>)> {
        self.evals += 1;
        (self.f)(x)
    }

    fn probe(&mut self, x0: &DVector<T>, d: &DVector<T>, alpha: T) -> Result<Probe<T>> {
        let x = x0 + d * alpha;
        match self.eval(&x) {
            Ok((value, grad)) if value.is_finite() && grad.iter().all(|g| g.is_finite()) => {
                let slope = grad.dot(d);
                Ok(Probe {
                    alpha,
                    value,
                    slope,
                    x,
                    grad,
                })
            }
            Ok(_) | Err(Error::NonFiniteEvaluation(_)) => Ok(Probe {
                alpha,
                value: T::infinity(),
                slope: T::infinity(),
                grad: DVector::zeros(x.len()),
                x,
            }),
            Err(e) => Err(e),
        }
    }
}

/// Minimizer of the cubic through two points with known slopes, safeguarded into `[lo, hi]`.
fn cubic_min<T: Real>(a: &Probe<T>, b: &Probe<T>) -> T {
    let (lo, hi) = if a.alpha < b.alpha {
        (a.alpha, b.alpha)
    } else {
        (b.alpha, a.alpha)
    };
    let width = hi - lo;
    let mid = (lo + hi) * T::lit(0.5);
    if !(b.value.is_finite() && b.slope.is_finite()) {
        return mid;
    }
    let d1 = a.slope + b.slope - T::lit(3.0) * (a.value - b.value) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if !(disc >= T::zero()) {
        return mid;
    }
    let d2 = disc.sqrt() * (b.alpha - a.alpha).signum();
    let t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + T::lit(2.0) * d2);
    let guard = T::lit(0.1) * width;
    if t.is_finite() && t >= lo + guard && t <= hi - guard {
        t
    } else {
        mid
    }
}

/// Strong-Wolfe line search along descent direction `d`.
///
/// Sufficient decrease is relaxed to `phi(a) <= phi(0) + eps_f` once the
/// predicted decrease falls under rounding of `phi(0)`.
fn line_search<T: Real, F>(
    obj: &mut Counted<T, F>,
    x0: &DVector<T>,
    f0: T,
    slope0: T,
    d: &DVector<T>,
    alpha_init: T,
    opts: &BfgsOptions<T>,
) -> Result<Option<Probe<T>>>
where
    F: FnMut(&DVector<T>) -> Result<(T, DVector<T>)>,
{
    let eps_f = T::lit(1e3) * T::eps() * (f0.abs() + T::one());
    let armijo = |p: &Probe<T>| {
        p.value <= f0 + opts.c1 * p.alpha * slope0
            || (p.value <= f0 + eps_f && p.slope <= (T::lit(2.0) * opts.c1 - T::one()) * slope0)
    };
    let curvature = |p: &Probe<T>| p.slope.abs() <= -opts.c2 * slope0;

    let start = Probe {
        alpha: T::zero(),
        value: f0,
        slope: slope0,
        x: x0.clone(),
        grad: DVector::zeros(x0.len()),
    };
    let mut prev = start;
    let mut alpha = alpha_init;
    let max_alpha = T::lit(1e10);

    for i in 0..40 {
        let cur = obj.probe(x0, d, alpha)?;
        if !armijo(&cur) || (i > 0 && cur.value >= prev.value) {
            return zoom(obj, x0, f0, slope0, d, prev, cur, opts, &armijo, &curvature);
        }
        if curvature(&cur) {
            return Ok(Some(cur));
        }
        if cur.slope >= T::zero() {
            return zoom(obj, x0, f0, slope0, d, cur, prev, opts, &armijo, &curvature);
        }
        prev = cur;
        alpha = (alpha * T::lit(2.0)).min(max_alpha);
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn zoom<T: Real, F>(
    obj: &mut Counted<T, F>,
    x0: &DVector<T>,
    _f0: T,
    _slope0: T,
    d: &DVector<T>,
    mut lo: Probe<T>,
    mut hi: Probe<T>,
    _opts: &BfgsOptions<T>,
    armijo: &dyn Fn(&Probe<T>) -> bool,
    curvature: &dyn Fn(&Probe<T>) -> bool,
) -> Result<Option<Probe<T>>>
where
    F: FnMut(&DVector<T>) -> Result<(T, DVector<T>)>,
{
    for _ in 0..60 {
        let alpha = cubic_min(&lo, &hi);
        if (hi.alpha - lo.alpha).abs() <= T::eps() * lo.alpha.abs().max(T::one()) {
            break;
        }
        let cur = obj.probe(x0, d, alpha)?;
        if !armijo(&cur) || cur.value >= lo.value {
            hi = cur;
        } else {
            if curvature(&cur) {
                return Ok(Some(cur));
            }
            if cur.slope * (hi.alpha - lo.alpha) >= T::zero() {
                hi = lo;
            }
            lo = cur;
        }
    }
    // best decrease found, if any
    if lo.alpha > T::zero() {
        Ok(Some(lo))
    } else {
        Ok(None)
    }
}

/// One secant step on the directional derivative, kept if it improves on `step`.
///
/// Exact on quadratics, which restores finite termination there.
fn refine<T: Real, F>(
    obj: &mut Counted<T, F>,
    x0: &DVector<T>,
    f0: T,
    slope0: T,
    d: &DVector<T>,
    step: Probe<T>,
    opts: &BfgsOptions<T>,
) -> Result<Probe<T>>
where
    F: FnMut(&DVector<T>) -> Result<(T, DVector<T>)>,
{
    let denom = step.slope - slope0;
    if step.slope == T::zero() || !(denom > T::zero()) {
        return Ok(step);
    }
    let alpha = -step.alpha * slope0 / denom;
    if !(alpha > T::zero()) || (alpha - step.alpha).abs() <= T::eps() * step.alpha {
        return Ok(step);
    }
    let trial = obj.probe(x0, d, alpha)?;
    let wolfe = trial.value <= f0 + opts.c1 * alpha * slope0 && trial.slope.abs() <= -opts.c2 * slope0;
    Ok(if wolfe && trial.value <= step.value {
        trial
    } else {
        step
    })
}

/// Minimizes `f` starting at `x0`. `f` returns the value and gradient.
///
/// Hitting `max_iter` is not an error: the last iterate comes back with
/// `converged = false`.
pub fn bfgs<T: Real, F>(f: F, x0: &DVector<T>, opts: &BfgsOptions<T>) -> Result<BfgsResult<T>>
where
    F: FnMut(&DVector<T>) -> Result<(T, DVector<T>)>,
{
    let n = x0.len();
    let mut obj = Counted {
        f,
        evals: 0,
        _t: std::marker::PhantomData,
    };
    let mut x = x0.clone();
    let (mut fx, mut g) = obj.eval(&x)?;
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEvaluation("objective at starting point"));
    }
    let mut h_inv = DMatrix::<T>::identity(n, n);
    let mut scaled = false;
    let mut iterations = 0;

    loop {
        let gnorm = g.norm();
        if gnorm <= opts.tol_grad {
            return Ok(BfgsResult {
                x,
                value: fx,
                gradient: g,
                grad_norm: gnorm,
                iterations,
                evaluations: obj.evals,
                converged: true,
            });
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let mut d = -(&h_inv * &g);
        let mut slope = g.dot(&d);
        if !(slope < T::zero()) {
            h_inv = DMatrix::identity(n, n);
            scaled = false;
            d = -g.clone();
            slope = -gnorm * gnorm;
        }
        let alpha0 = if scaled {
            T::one()
        } else {
            T::one().min(T::one() / gnorm)
        };
        let Some(step) = line_search(&mut obj, &x, fx, slope, &d, alpha0, opts)? else {
            if scaled {
                // retry once from steepest descent before giving up
                h_inv = DMatrix::identity(n, n);
                scaled = false;
                continue;
            }
            break;
        };
        let step = refine(&mut obj, &x, fx, slope, &d, step, opts)?;

        let s = &step.x - &x;
        let y = &step.grad - &g;
        let sy = s.dot(&y);
        x = step.x;
        fx = step.value;
        g = step.grad;

        if sy > T::eps() * s.norm() * y.norm() {
            if !scaled {
                h_inv = DMatrix::identity(n, n) * (sy / y.norm_squared());
                scaled = true;
            }
            let rho = T::one() / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (H y s^T + s y^T H) + (rho^2 y^T H y + rho) s s^T
            h_inv -= (&hy * s.transpose() + &s * hy.transpose()) * rho;
            h_inv += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }
    }

    let grad_norm = g.norm();
    Ok(BfgsResult {
        converged: grad_norm <= opts.tol_grad,
        x,
        value: fx,
        gradient: g,
        grad_norm,
        iterations,
        evaluations: obj.evals,
    })
}
