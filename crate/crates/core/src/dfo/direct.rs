use nalgebra::DVector;

use super::{DfoTrace, Incumbent};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct DirectOptions<T: Real> {
    /// Balance parameter in the potential-optimality test.
    pub epsilon: T,
    pub max_evaluations: usize,
}

impl<T: Real> Default for DirectOptions<T> {
    fn default() -> Self {
        Self {
            epsilon: T::lit(1e-4),
            max_evaluations: 500,
        }
    }
}

/// Hyper-rectangle in unit-cube coordinates; side `i` has length `3^-level[i]`.
struct Rect<T: Real> {
    center: DVector<T>,
    level: Vec<u32>,
    value: T,
}

impl<T: Real> Rect<T> {
    fn half_diagonal(&self) -> T {
        let s: T = self.level.iter().map(|&k| side::<T>(k) * side::<T>(k)).sum();
        s.sqrt() * T::lit(0.5)
    }
}

fn side<T: Real>(level: u32) -> T {
    T::lit(3f64.powi(-(level as i32)))
}

/// Indices of potentially optimal rectangles, smallest size first.
fn potentially_optimal<T: Real>(rects: &[Rect<T>], epsilon: T) -> Vec<usize> {
    let fmin = rects.iter().map(|r| r.value).fold(T::infinity(), T::min);
    // group by size; sizes are keyed by the sorted level multiset
    let mut groups: Vec<(Vec<u32>, T, T, Vec<usize>)> = Vec::new();
    for (i, r) in rects.iter().enumerate() {
        let mut key = r.level.clone();
        key.sort_unstable();
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => {
                if r.value < g.2 {
                    g.2 = r.value;
                    g.3 = vec![i];
                } else if r.value == g.2 {
                    g.3.push(i);
                }
            }
            None => groups.push((key, r.half_diagonal(), r.value, vec![i])),
        }
    }
    groups.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    if !fmin.is_finite() {
        // nothing finite yet: keep dividing the largest rectangles
        return groups.last().map(|g| g.3.clone()).unwrap_or_default();
    }

    let mut out = Vec::new();
    for (j, gj) in groups.iter().enumerate() {
        let (dj, fj) = (gj.1, gj.2);
        if !fj.is_finite() {
            continue;
        }
        let mut k_low = T::zero();
        let mut k_high = T::infinity();
        for (i, gi) in groups.iter().enumerate() {
            let (di, fi) = (gi.1, gi.2);
            if i < j {
                k_low = k_low.max((fj - fi) / (dj - di));
            } else if i > j {
                k_high = k_high.min((fi - fj) / (di - dj));
            }
        }
        if k_low > k_high {
            continue;
        }
        if k_high.is_finite() && fj - k_high * dj > fmin - epsilon * fmin.abs() {
            continue;
        }
        out.extend(gj.3.iter().copied());
    }
    out
}

/// DIRECT (dividing rectangles) over the box `[lower, upper]`.
///
/// Terminates when the evaluation budget is spent, which is the normal
/// stopping mode (`converged = true`). The first point is the box center.
pub fn direct_optimize<T: Real, F>(
    mut f: F,
    lower: &DVector<T>,
    upper: &DVector<T>,
    opts: &DirectOptions<T>,
) -> Result<DfoTrace<T>>
where
    F: FnMut(&DVector<T>) -> T,
{
    let n = lower.len();
    if n == 0 || upper.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: upper.len(),
        });
    }
    if lower
        .iter()
        .zip(upper.iter())
        .any(|(l, u)| !(l.is_finite() && u.is_finite() && l < u))
    {
        return Err(Error::InvalidInput(
            "box bounds must be finite with lower < upper".into(),
        ));
    }
    if opts.max_evaluations == 0 {
        return Err(Error::InvalidParameter {
            name: "budget".into(),
            reason: "must be at least 1".into(),
        });
    }
    let width = upper - lower;
    let to_box = |c: &DVector<T>| lower + c.component_mul(&width);

    let mut trace = Incumbent::new();
    let mut evaluations = 0;
    let mut eval = |c: &DVector<T>, trace: &mut Incumbent<T>, evaluations: &mut usize| -> T {
        *evaluations += 1;
        let x = to_box(c);
        let v = f(&x);
        let v = if v.is_finite() { v } else { T::infinity() };
        trace.offer(&x, v);
        v
    };

    let half = T::lit(0.5);
    let c0 = DVector::from_element(n, half);
    let v0 = eval(&c0, &mut trace, &mut evaluations);
    let mut rects = vec![Rect {
        center: c0,
        level: vec![0; n],
        value: v0,
    }];
    trace.checkpoint();

    'outer: while evaluations < opts.max_evaluations {
        let chosen = potentially_optimal(&rects, opts.epsilon);
        if chosen.is_empty() {
            break;
        }
        for idx in chosen {
            let (center, level) = (rects[idx].center.clone(), rects[idx].level.clone());
            let kmin = *level.iter().min().expect("nonempty");
            let dims: Vec<usize> = (0..n).filter(|&i| level[i] == kmin).collect();
            let delta = side::<T>(kmin + 1);
            // sample both neighbors along each longest side
            let mut samples = Vec::with_capacity(dims.len());
            for &i in &dims {
                let mut pair = [(center.clone(), T::infinity()), (center.clone(), T::infinity())];
                pair[0].0[i] -= delta;
                pair[1].0[i] += delta;
                for p in pair.iter_mut() {
                    if evaluations >= opts.max_evaluations {
                        break 'outer;
                    }
                    p.1 = eval(&p.0, &mut trace, &mut evaluations);
                }
                let w = pair[0].1.min(pair[1].1);
                samples.push((i, w, pair));
            }
            samples.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            // split along the best dimension first; children inherit earlier splits
            let mut parent_level = level;
            for (i, _, pair) in samples {
                parent_level[i] += 1;
                for (c, v) in pair {
                    rects.push(Rect {
                        center: c,
                        level: parent_level.clone(),
                        value: v,
                    });
                }
            }
            rects[idx].level = parent_level;
        }
        trace.checkpoint();
    }
    trace.checkpoint();
    Ok(trace.finish(evaluations, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> (DVector<f64>, DVector<f64>) {
        (DVector::zeros(n), DVector::from_element(n, 1.0))
    }

    #[test]
    fn axis_minimizer() {
        let (l, u) = unit(2);
        let t = direct_optimize(|x| (x[0] - 1.0 / 3.0).abs(), &l, &u, &Default::default()).unwrap();
        assert!((t.best_point[0] - 1.0 / 3.0).abs() < 1e-2);
        assert!(t.evaluations <= 500);
    }

    #[test]
    fn quadratic_minimizer() {
        let (l, u) = unit(2);
        let target = DVector::from_vec(vec![0.2, 0.8]);
        let t = direct_optimize(|x| (x - &target).norm_squared(), &l, &u, &Default::default()).unwrap();
        assert!((&t.best_point - &target).norm() < 1e-2);
    }

    #[test]
    fn budget_one_is_center() {
        let (l, u) = unit(3);
        let opts = DirectOptions {
            max_evaluations: 1,
            ..Default::default()
        };
        let t = direct_optimize(|x| x.norm(), &l, &u, &opts).unwrap();
        assert_eq!(t.evaluations, 1);
        assert_eq!(t.best_point, DVector::from_element(3, 0.5));
    }

    #[test]
    fn points_stay_in_box() {
        let l = DVector::from_vec(vec![-1.0, 2.0]);
        let u = DVector::from_vec(vec![1.0, 5.0]);
        let mut seen = Vec::new();
        let t = direct_optimize(
            |x: &DVector<f64>| {
                seen.push(x.clone());
                x[0].sin() + x[1].cos()
            },
            &l,
            &u,
            &DirectOptions {
                max_evaluations: 137,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(t.evaluations <= 137);
        assert_eq!(seen.len(), t.evaluations);
        for x in seen {
            assert!((0..2).all(|i| x[i] >= l[i] && x[i] <= u[i]));
        }
    }

    #[test]
    fn undefined_center_keeps_dividing() {
        let (l, u) = unit(2);
        let t = direct_optimize(
            |x: &DVector<f64>| {
                if (x[0] - 0.5).abs() < 0.1 {
                    f64::INFINITY
                } else {
                    (x[0] - 0.2).powi(2) + x[1]
                }
            },
            &l,
            &u,
            &Default::default(),
        )
        .unwrap();
        assert!(t.evaluations > 100);
        assert!(t.best_value < 1e-2);
    }

    #[test]
    fn rejects_bad_box() {
        let r = direct_optimize(
            |x: &DVector<f64>| x[0],
            &DVector::from_vec(vec![1.0]),
            &DVector::from_vec(vec![0.0]),
            &Default::default(),
        );
        assert!(r.is_err());
    }
}
