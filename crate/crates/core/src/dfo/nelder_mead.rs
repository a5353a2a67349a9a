use nalgebra::DVector;

use super::{DfoTrace, Incumbent};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions<T: Real> {
    pub reflection: T,
    pub expansion: T,
    pub contraction: T,
    pub shrink: T,
    /// Offset of each initial vertex along its coordinate axis.
    pub initial_step: T,
    /// Simplex diameter tolerance (infinity norm).
    pub tol_x: T,
    /// Spread of vertex values tolerance.
    pub tol_f: T,
    /// `None` means `200 * dim`.
    pub max_evaluations: Option<usize>,
}

impl<T: Real> Default for NelderMeadOptions<T> {
    fn default() -> Self {
        Self {
            reflection: T::one(),
            expansion: T::lit(2.0),
            contraction: T::lit(0.5),
            shrink: T::lit(0.5),
            initial_step: T::lit(0.05),
            tol_x: T::lit(1e-8),
            tol_f: T::lit(1e-8),
            max_evaluations: None,
        }
    }
}

/// Nelder-Mead downhill simplex.
///
/// Runs until the simplex diameter and the spread of vertex values both
/// fall under their tolerances, or the evaluation budget is spent
/// (`converged = false`). Non-finite objective values rank as worst.
pub fn nelder_mead<T: Real, F>(mut f: F, x0: &DVector<T>, opts: &NelderMeadOptions<T>) -> Result<DfoTrace<T>>
where
    F: FnMut(&DVector<T>) -> T,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty starting point".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("starting point has non-finite entries".into()));
    }
    let budget = opts.max_evaluations.unwrap_or(200 * n).max(1);
    let mut trace = Incumbent::new();
    let mut evaluations = 0;
    let mut eval = |x: &DVector<T>, trace: &mut Incumbent<T>, evaluations: &mut usize| -> T {
        *evaluations += 1;
        let v = f(x);
        let v = if v.is_finite() { v } else { T::infinity() };
        trace.offer(x, v);
        v
    };

    let mut simplex: Vec<(DVector<T>, T)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut trace, &mut evaluations);
    simplex.push((x0.clone(), v0));
    for i in 0..n {
        if evaluations >= budget {
            return Ok(trace.finish(evaluations, false));
        }
        let mut x = x0.clone();
        x[i] += opts.initial_step;
        let v = eval(&x, &mut trace, &mut evaluations);
        simplex.push((x, v));
    }
    let order = |s: &mut Vec<(DVector<T>, T)>| {
        s.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    };
    order(&mut simplex);
    trace.checkpoint();

    loop {
        let best = simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| (x - &simplex[0].0).amax())
            .fold(T::zero(), T::max);
        let spread = simplex[1..]
            .iter()
            .map(|(_, v)| (*v - best).abs())
            .fold(T::zero(), T::max);
        if diameter <= opts.tol_x && spread <= opts.tol_f {
            return Ok(trace.finish(evaluations, true));
        }
        if evaluations >= budget {
            return Ok(trace.finish(evaluations, false));
        }

        let worst = simplex[n].clone();
        let centroid = simplex[..n].iter().fold(DVector::zeros(n), |acc, (x, _)| acc + x) / T::of_usize(n);
        let xr = &centroid + (&centroid - &worst.0) * opts.reflection;
        let fr = eval(&xr, &mut trace, &mut evaluations);

        let mut shrink = false;
        if fr < best {
            let xe = &centroid + (&xr - &centroid) * opts.expansion;
            let fe = if evaluations < budget {
                eval(&xe, &mut trace, &mut evaluations)
            } else {
                T::infinity()
            };
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else if evaluations < budget {
            if fr < worst.1 {
                let xc = &centroid + (&xr - &centroid) * opts.contraction;
                let fc = eval(&xc, &mut trace, &mut evaluations);
                if fc <= fr {
                    simplex[n] = (xc, fc);
                } else {
                    shrink = true;
                }
            } else {
                let xcc = &centroid + (&worst.0 - &centroid) * opts.contraction;
                let fcc = eval(&xcc, &mut trace, &mut evaluations);
                if fcc < worst.1 {
                    simplex[n] = (xcc, fcc);
                } else {
                    shrink = true;
                }
            }
        }
        if shrink {
            let x_best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                if evaluations >= budget {
                    break;
                }
                let x = &x_best + (&vertex.0 - &x_best) * opts.shrink;
                let v = eval(&x, &mut trace, &mut evaluations);
                *vertex = (x, v);
            }
        }
        order(&mut simplex);
        trace.checkpoint();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(a: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(a)
    }

    #[test]
    fn quadratic_minimum() {
        let target = v(&[0.3, 0.7]);
        let t = nelder_mead(|x| (x - &target).norm_squared(), &v(&[0.9, 0.1]), &Default::default()).unwrap();
        assert!((&t.best_point - &target).norm() < 1e-4);
    }

    #[test]
    fn constant_converges_by_spread() {
        let t = nelder_mead(|_| 1.0, &v(&[0.5, 0.5]), &Default::default()).unwrap();
        assert!(t.converged);
        assert!(t.evaluations < 400);
        assert_eq!(t.best_value, 1.0);
    }

    #[test]
    fn nonsmooth_max_norm() {
        let t = nelder_mead(|x| x.amax(), &v(&[1.0, 1.0]), &Default::default()).unwrap();
        assert!(t.best_value <= 1e-4, "{}", t.best_value);
    }

    #[test]
    fn budget_is_respected() {
        let opts = NelderMeadOptions {
            max_evaluations: Some(7),
            ..Default::default()
        };
        let t = nelder_mead(|x| x.norm_squared(), &v(&[1.0, 2.0, 3.0]), &opts).unwrap();
        assert!(t.evaluations <= 7);
        assert!(!t.converged);
    }

    #[test]
    fn nan_ranks_worst() {
        let t = nelder_mead(
            |x| if x[0] > 0.52 { f64::NAN } else { (x[0] - 0.5).powi(2) },
            &v(&[0.4]),
            &Default::default(),
        )
        .unwrap();
        assert!((t.best_point[0] - 0.5).abs() < 1e-4);
    }
}
