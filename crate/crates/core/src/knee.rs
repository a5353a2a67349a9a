//! Knee search: minimize the maximal-change function over the weight simplex.
//!
//! `MCF(lambda)` is the largest ratio `|col_i| / max(|col_j|, eps)` over
//! ordered pairs `i != j` of columns of the Pareto sensitivity matrix. It is
//! at least one whenever no column vanishes, and equals one exactly where all
//! objectives change at the same rate.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::dfo::{direct_optimize, nelder_mead, DfoTrace, DirectOptions, NelderMeadOptions};
use crate::error::{Error, Result};
use crate::inner_solvers::{SolutionCache, SolverOptions};
use crate::neighborhoods::{
    compute_mcm, ideal_nadir, subfront_of, AlphaMode, GridSolutions, IdealNadir, Neighborhood, NeighborhoodKind,
    NeighborhoodSpec,
};
use crate::problems::MooProblem;
use crate::scalar::Real;
use crate::scalarization::{project_simplex, WeightVector};
use crate::sensitivity::{sensitivity, SensitivityResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KneeMethod {
    NelderMead,
    Direct,
}

impl KneeMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            KneeMethod::NelderMead => "nm",
            KneeMethod::Direct => "direct",
        }
    }
}

impl fmt::Display for KneeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KneeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nm" | "nelder-mead" => Ok(KneeMethod::NelderMead),
            "direct" => Ok(KneeMethod::Direct),
            _ => Err(Error::InvalidInput(format!(
                "unknown method '{s}' (expected nm or direct)"
            ))),
        }
    }
}

/// MCF together with a flag for the all-zero-columns case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mcf<T: Real> {
    pub value: T,
    /// Every column norm is below machine epsilon.
    pub degenerate: bool,
}

/// MCF of a sensitivity matrix.
pub fn mcf_from_sensitivity<T: Real>(sens: &SensitivityResult<T>) -> Mcf<T> {
    let norms = sens.column_norms();
    let eps = T::eps();
    let mut value = T::zero();
    for (i, &ni) in norms.iter().enumerate() {
        for (j, &nj) in norms.iter().enumerate() {
            if i != j {
                value = value.max(ni / nj.max(eps));
            }
        }
    }
    let degenerate = norms.iter().all(|&n| n < eps);
    Mcf { value, degenerate }
}

/// MCF at `lambda`, solving the subproblem from `x = 0`.
pub fn mcf_value<T: Real>(problem: &dyn MooProblem<T>, lambda: &WeightVector<T>, opts: &SolverOptions<T>) -> Result<T> {
    let cache = SolutionCache::new(problem, *opts);
    Ok(McfEvaluator::new(&cache).eval(lambda)?.0.value)
}

struct McfEvaluator<'c, 'p, T: Real> {
    cache: &'c SolutionCache<'p, T>,
    zero: DVector<T>,
    warned: Cell<bool>,
}

impl<'c, 'p, T: Real> McfEvaluator<'c, 'p, T> {
    fn new(cache: &'c SolutionCache<'p, T>) -> Self {
        Self {
            zero: DVector::zeros(cache.problem().n()),
            cache,
            warned: Cell::new(false),
        }
    }

    fn eval(&self, lambda: &WeightVector<T>) -> Result<(Mcf<T>, SensitivityResult<T>)> {
        let sol = self.cache.solve(lambda, &self.zero)?;
        let sens = sensitivity(self.cache.problem(), &sol)?;
        let mcf = mcf_from_sensitivity(&sens);
        if mcf.degenerate {
            let first = !self.warned.replace(true);
            let msg = format!(
                "{}: all sensitivity columns vanish at {:?}, MCF = 0",
                self.cache.problem().name(),
                lambda.as_slice()
            );
            if first {
                log::warn!("{msg}");
            } else {
                log::debug!("{msg}");
            }
        }
        Ok((mcf, sens))
    }

    /// Objective seen by the optimizers; failures become `+inf`.
    fn objective(&self, v: &DVector<T>) -> T {
        let lambda = project_simplex(v);
        match self.eval(&lambda) {
            Ok((m, _)) => m.value,
            Err(e) => {
                log::debug!("MCF undefined at {:?}: {e}", lambda.as_slice());
                T::infinity()
            }
        }
    }
}

/// Ellipsoid sizing used for the MCM trace when none is given: adaptive
/// (factor 0.4) for GRV2 and constrained problems, fixed `alpha = 0.1` otherwise.
pub fn default_alpha_mode<T: Real>(problem: &dyn MooProblem<T>) -> AlphaMode<T> {
    if problem.is_constrained() || problem.name().eq_ignore_ascii_case("GRV2") {
        AlphaMode::Adaptive(T::lit(0.4))
    } else {
        AlphaMode::Fixed
    }
}

/// Default evaluation budget: `200 q` for Nelder-Mead; 500 (q <= 3) or 2000 for DIRECT.
pub fn default_budget(method: KneeMethod, q: usize) -> usize {
    match method {
        KneeMethod::NelderMead => 200 * q,
        KneeMethod::Direct if q <= 3 => 500,
        KneeMethod::Direct => 2000,
    }
}

#[derive(Debug, Clone)]
pub struct KneeOptions<T: Real> {
    pub method: KneeMethod,
    /// Required for Nelder-Mead, ignored by DIRECT.
    pub start: Option<WeightVector<T>>,
    /// `None` picks [`default_budget`].
    pub budget: Option<usize>,
    /// `None` picks [`default_alpha_mode`].
    pub alpha_mode: Option<AlphaMode<T>>,
    /// Fixed ellipsoid size for the MCM trace.
    pub alpha: T,
    pub solver: SolverOptions<T>,
}

impl<T: Real> KneeOptions<T> {
    pub fn new(method: KneeMethod, start: Option<WeightVector<T>>) -> Self {
        Self {
            method,
            start,
            budget: None,
            alpha_mode: None,
            alpha: T::lit(0.1),
            solver: SolverOptions::default(),
        }
    }
}

/// One optimizer iteration.
#[derive(Debug, Clone)]
pub struct KneeTraceEntry<T: Real> {
    pub iteration: usize,
    /// Projected incumbent.
    pub lambda: WeightVector<T>,
    pub mcf: T,
    /// MCM of the ellipsoid sub-front at the incumbent, when a grid was given and it is defined.
    pub mcm: Option<T>,
    pub alpha_used: Option<T>,
}

#[derive(Debug, Clone)]
pub struct KneeResult<T: Real> {
    pub lambda_star: WeightVector<T>,
    pub x_star: DVector<T>,
    pub f_star: DVector<T>,
    pub mcf_star: T,
    pub trace: Vec<KneeTraceEntry<T>>,
    pub method: KneeMethod,
    pub start: Option<WeightVector<T>>,
    pub evaluations: usize,
    pub converged: bool,
}

struct McmProbe<'a, T: Real> {
    grid: &'a GridSolutions<T>,
    bounds: IdealNadir<T>,
    spec: NeighborhoodSpec<T>,
}

impl<T: Real> McmProbe<'_, T> {
    fn at(&self, center: &WeightVector<T>, sens: SensitivityResult<T>) -> (Option<T>, Option<T>) {
        let nb = match Neighborhood::new(&self.spec, center.clone(), Some(sens), &self.grid.grid) {
            Ok(nb) => nb,
            Err(e) => {
                log::debug!("no ellipsoid at {:?}: {e}", center.as_slice());
                return (None, None);
            }
        };
        let sf = subfront_of(&nb, self.grid);
        match compute_mcm(&sf, &self.bounds) {
            Ok(m) => (Some(m.value), Some(nb.size)),
            Err(e) => {
                log::warn!("MCM undefined at {:?}: {e}", center.as_slice());
                (None, Some(nb.size))
            }
        }
    }
}

/// Minimizes the MCF over the simplex with Nelder-Mead or DIRECT.
///
/// The optimizers see `v -> MCF(proj(v))`, where `proj` is the Euclidean
/// projection onto the simplex; DIRECT searches the unit box. Points where the
/// sensitivity is undefined score `+inf`. With `grid`, each new incumbent also
/// gets the MCM of its ellipsoid sub-front (never used as the objective).
pub fn find_knee<T: Real>(
    problem: &dyn MooProblem<T>,
    opts: &KneeOptions<T>,
    grid: Option<&GridSolutions<T>>,
) -> Result<KneeResult<T>> {
    let q = problem.q();
    let budget = opts.budget.unwrap_or_else(|| default_budget(opts.method, q));
    let cache = SolutionCache::new(problem, opts.solver);
    let eval = McfEvaluator::new(&cache);

    let trace: DfoTrace<T> = match opts.method {
        KneeMethod::NelderMead => {
            let start = opts
                .start
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("Nelder-Mead needs a starting weight vector".into()))?;
            if start.len() != q {
                return Err(Error::DimensionMismatch {
                    expected: q,
                    got: start.len(),
                });
            }
            nelder_mead(
                |v| eval.objective(v),
                start.as_vector(),
                &NelderMeadOptions {
                    max_evaluations: Some(budget),
                    ..Default::default()
                },
            )?
        }
        KneeMethod::Direct => direct_optimize(
            |v| eval.objective(v),
            &DVector::zeros(q),
            &DVector::from_element(q, T::one()),
            &DirectOptions {
                max_evaluations: budget,
                ..Default::default()
            },
        )?,
    };

    let lambda_star = project_simplex(&trace.best_point);
    if !trace.best_value.is_finite() {
        return Err(Error::McfUndefined);
    }
    let best = cache.solve(&lambda_star, &eval.zero)?;

    let probe = match grid {
        Some(g) => {
            let alpha_mode = opts.alpha_mode.unwrap_or_else(|| default_alpha_mode(problem));
            Some(McmProbe {
                grid: g,
                bounds: ideal_nadir(g)?,
                spec: NeighborhoodSpec::new(NeighborhoodKind::Ellipsoid, opts.alpha, alpha_mode)?,
            })
        }
        None => None,
    };
    let mut entries = Vec::with_capacity(trace.iterates.len());
    let mut last: Option<(T, Option<T>, Option<T>)> = None;
    for (k, (v, value)) in trace.iterates.iter().enumerate() {
        let lambda = project_simplex(v);
        let (mcm, alpha_used) = match (&probe, last) {
            (_, Some((prev, mcm, a))) if prev == *value => (mcm, a),
            (Some(p), _) if value.is_finite() => {
                let (_, sens) = eval.eval(&lambda)?;
                p.at(&lambda, sens)
            }
            _ => (None, None),
        };
        last = Some((*value, mcm, alpha_used));
        entries.push(KneeTraceEntry {
            iteration: k,
            lambda,
            mcf: *value,
            mcm,
            alpha_used,
        });
    }

    Ok(KneeResult {
        x_star: best.x,
        f_star: best.f_values,
        mcf_star: trace.best_value,
        lambda_star,
        trace: entries,
        method: opts.method,
        start: match opts.method {
            KneeMethod::NelderMead => opts.start.clone(),
            KneeMethod::Direct => None,
        },
        evaluations: trace.evaluations,
        converged: trace.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Grv2, Zlt1q};
    use nalgebra::DMatrix;

    fn w(v: &[f64]) -> WeightVector<f64> {
        WeightVector::from_slice(v).unwrap()
    }

    #[test]
    fn zlt1_centroid_is_level() {
        let t = 1.0 / 3.0;
        let m = mcf_value(&Zlt1q::zlt1(), &w(&[t, t, t]), &SolverOptions::default()).unwrap();
        assert!((m - 1.0).abs() < 1e-10);
        let off = mcf_value(&Zlt1q::zlt1(), &w(&[0.5, 0.3, 0.2]), &SolverOptions::default()).unwrap();
        assert!(off > 1.0);
    }

    #[test]
    fn zero_columns_are_degenerate() {
        let s = SensitivityResult::from_parts(DMatrix::<f64>::zeros(2, 2), &DMatrix::identity(2, 2));
        let m = mcf_from_sensitivity(&s);
        assert_eq!(
            m,
            Mcf {
                value: 0.0,
                degenerate: true
            }
        );
    }

    #[test]
    fn ordered_pairs_floor() {
        let s = SensitivityResult::from_parts(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0])),
            &DMatrix::identity(2, 2),
        );
        assert!((mcf_from_sensitivity(&s).value - 3.0f64).abs() < 1e-15);
    }

    #[test]
    fn nm_needs_start() {
        let r = find_knee(
            &Zlt1q::zlt1(),
            &KneeOptions::<f64>::new(KneeMethod::NelderMead, None),
            None,
        );
        assert!(r.is_err());
    }

    #[test]
    fn zlt1_nm_knee() {
        let r = find_knee(
            &Zlt1q::zlt1(),
            &KneeOptions::new(KneeMethod::NelderMead, Some(w(&[0.8, 0.1, 0.1]))),
            None,
        )
        .unwrap();
        assert!((r.lambda_star.as_vector() - DVector::from_element(3, 1.0 / 3.0)).norm() <= 1e-2);
        assert!(r.mcf_star <= 1.0 + 1e-3);
        assert!(r.trace.windows(2).all(|p| p[1].mcf <= p[0].mcf));
    }

    #[test]
    fn grv2_methods_agree() {
        let p = Grv2::new(2);
        let nm = find_knee::<f64>(
            &p,
            &KneeOptions::new(KneeMethod::NelderMead, Some(w(&[0.9, 0.1]))),
            None,
        )
        .unwrap();
        let di = find_knee::<f64>(&p, &KneeOptions::new(KneeMethod::Direct, None), None).unwrap();
        assert!((nm.mcf_star - di.mcf_star).abs() <= 1e-2 * nm.mcf_star);
    }

    #[test]
    fn method_names() {
        assert_eq!("NM".parse::<KneeMethod>().unwrap(), KneeMethod::NelderMead);
        assert_eq!("direct".parse::<KneeMethod>().unwrap(), KneeMethod::Direct);
        assert!("bfgs".parse::<KneeMethod>().is_err());
    }
}
