//! Weight-space neighborhoods, sub-fronts and the most-changing metric (MCM).
//!
//! Three neighborhood shapes around a center `c`, with `d = lambda - c`:
//!
//! * ball: `|d| <= r`
//! * ellipsoid: `|dF+ d| <= alpha`
//! * Cassini oval: `|dF d| >= beta |d|^2`
//!
//! Sub-fronts are taken over a [`SimplexGrid`] whose points have all been
//! solved once ([`GridSolutions`]); the same solutions give the full-front
//! ranges in the MCM denominator.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::inner_solvers::{solve_weighted_sum, ScalarizedSolution, SolverOptions};
use crate::linalg::{default_rank_tol, pseudo_inverse};
use crate::problems::MooProblem;
use crate::scalar::Real;
use crate::scalarization::{SimplexGrid, WeightVector};
use crate::sensitivity::{sensitivity, SensitivityResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NeighborhoodKind {
    Ball,
    Ellipsoid,
    Cassini,
}

impl NeighborhoodKind {
    pub const ALL: [NeighborhoodKind; 3] = [
        NeighborhoodKind::Ball,
        NeighborhoodKind::Ellipsoid,
        NeighborhoodKind::Cassini,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NeighborhoodKind::Ball => "ball",
            NeighborhoodKind::Ellipsoid => "ellipsoid",
            NeighborhoodKind::Cassini => "cassini",
        }
    }

    fn needs_sensitivity(self) -> bool {
        self != NeighborhoodKind::Ball
    }
}

impl fmt::Display for NeighborhoodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NeighborhoodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NeighborhoodKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown neighborhood kind '{s}'")))
    }
}

/// How the ellipsoid size is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode<T: Real> {
    Fixed,
    /// `alpha = factor * mean over the grid of |dF+ (lambda_i - c)|`.
    Adaptive(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborhoodSpec<T: Real> {
    pub kind: NeighborhoodKind,
    /// `r`, `alpha` or `beta`; ignored for an adaptive ellipsoid.
    pub size: T,
    pub alpha_mode: AlphaMode<T>,
}

impl<T: Real> NeighborhoodSpec<T> {
    pub fn new(kind: NeighborhoodKind, size: T, alpha_mode: AlphaMode<T>) -> Result<Self> {
        match alpha_mode {
            AlphaMode::Fixed if !(size > T::zero() && size.is_finite()) => Err(Error::InvalidParameter {
                name: "size".into(),
                reason: format!("must be positive and finite, got {size}"),
            }),
            AlphaMode::Adaptive(f) if !(f > T::zero() && f.is_finite()) => Err(Error::InvalidParameter {
                name: "adaptive factor".into(),
                reason: format!("must be positive and finite, got {f}"),
            }),
            AlphaMode::Adaptive(_) if kind != NeighborhoodKind::Ellipsoid => Err(Error::InvalidParameter {
                name: "alpha mode".into(),
                reason: format!("adaptive sizing applies to the ellipsoid only, not {kind}"),
            }),
            _ => Ok(Self { kind, size, alpha_mode }),
        }
    }

    pub fn fixed(kind: NeighborhoodKind, size: T) -> Result<Self> {
        Self::new(kind, size, AlphaMode::Fixed)
    }

    pub fn adaptive_ellipsoid(factor: T) -> Result<Self> {
        Self::new(NeighborhoodKind::Ellipsoid, T::zero(), AlphaMode::Adaptive(factor))
    }
}

fn slack<T: Real>(size: T) -> T {
    T::lit(64.0) * T::eps() * size.max(T::one())
}

/// Membership of `lambda` in the neighborhood of kind `kind` and size `size` around `center`.
///
/// `sens` must be computed at `center`; it is not read for the ball. The
/// center itself belongs to every neighborhood.
pub fn neighborhood_contains<T: Real>(
    kind: NeighborhoodKind,
    size: T,
    center: &WeightVector<T>,
    sens: Option<&SensitivityResult<T>>,
    lambda: &WeightVector<T>,
) -> Result<bool> {
    let d = lambda.as_vector() - center.as_vector();
    let need =
        || sens.ok_or_else(|| Error::InvalidInput(format!("{kind} neighborhood needs the sensitivity at its center")));
    Ok(match kind {
        NeighborhoodKind::Ball => d.norm() <= size + slack(size),
        NeighborhoodKind::Ellipsoid => (&need()?.pinv_df * &d).norm() <= size + slack(size),
        NeighborhoodKind::Cassini => {
            let lhs = (&need()?.df_dlambda * &d).norm();
            let rhs = size * d.norm_squared();
            lhs >= rhs - slack(rhs)
        }
    })
}

/// Adaptive ellipsoid size around `center`.
pub fn adaptive_alpha<T: Real>(
    pinv_df: &DMatrix<T>,
    center: &WeightVector<T>,
    grid: &SimplexGrid<T>,
    factor: T,
) -> Result<T> {
    if !(factor > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "adaptive factor".into(),
            reason: format!("must be positive, got {factor}"),
        });
    }
    if grid.is_empty() {
        return Err(Error::DegenerateNeighborhood("empty grid".into()));
    }
    let total: T = grid
        .points()
        .iter()
        .map(|p| (pinv_df * (p.as_vector() - center.as_vector())).norm())
        .sum();
    let alpha = factor * total / T::of_usize(grid.len());
    if alpha > T::zero() && alpha.is_finite() {
        Ok(alpha)
    } else {
        Err(Error::DegenerateNeighborhood(
            "pseudo-inverse annihilates every grid offset".into(),
        ))
    }
}

/// A neighborhood with its size resolved and the center sensitivity attached.
#[derive(Debug, Clone)]
pub struct Neighborhood<T: Real> {
    pub kind: NeighborhoodKind,
    pub size: T,
    pub center: WeightVector<T>,
    pub sensitivity: Option<SensitivityResult<T>>,
}

impl<T: Real> Neighborhood<T> {
    /// Resolves an adaptive size against `grid` if needed.
    pub fn new(
        spec: &NeighborhoodSpec<T>,
        center: WeightVector<T>,
        sensitivity: Option<SensitivityResult<T>>,
        grid: &SimplexGrid<T>,
    ) -> Result<Self> {
        if spec.kind.needs_sensitivity() && sensitivity.is_none() {
            return Err(Error::InvalidInput(format!(
                "{} neighborhood needs the sensitivity at its center",
                spec.kind
            )));
        }
        let size = match spec.alpha_mode {
            AlphaMode::Fixed => spec.size,
            AlphaMode::Adaptive(factor) => adaptive_alpha(
                &sensitivity.as_ref().expect("checked above").pinv_df,
                &center,
                grid,
                factor,
            )?,
        };
        Ok(Self {
            kind: spec.kind,
            size,
            center,
            sensitivity,
        })
    }

    pub fn contains(&self, lambda: &WeightVector<T>) -> bool {
        neighborhood_contains(self.kind, self.size, &self.center, self.sensitivity.as_ref(), lambda)
            .expect("sensitivity present when required")
    }
}

/// Solutions at every grid point.
#[derive(Debug, Clone)]
pub struct GridSolutions<T: Real> {
    pub grid: SimplexGrid<T>,
    /// `None` where the solve failed or did not converge.
    pub solutions: Vec<Option<ScalarizedSolution<T>>>,
}

impl<T: Real> GridSolutions<T> {
    pub fn failures(&self) -> usize {
        self.solutions.iter().filter(|s| s.is_none()).count()
    }

    pub fn solved(&self) -> impl Iterator<Item = (usize, &ScalarizedSolution<T>)> {
        self.solutions
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|s| (i, s)))
    }
}

/// Solves the weighted sum at every grid point, in grid order.
///
/// With `opts.warm_start`, each solve starts from an already solved grid
/// neighbor (one unit moved between two coordinates); otherwise, and when no
/// neighbor is solved yet, from `x = 0`. Fails if more than 10% of the
/// points cannot be solved.
pub fn solve_grid<T: Real>(
    problem: &dyn MooProblem<T>,
    grid: &SimplexGrid<T>,
    opts: &SolverOptions<T>,
) -> Result<GridSolutions<T>> {
    if grid.q() != problem.q() {
        return Err(Error::DimensionMismatch {
            expected: problem.q(),
            got: grid.q(),
        });
    }
    let index: HashMap<&[usize], usize> = grid
        .compositions()
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_slice(), i))
        .collect();
    let q = grid.q();
    let zero = DVector::zeros(problem.n());
    let mut solutions: Vec<Option<ScalarizedSolution<T>>> = Vec::with_capacity(grid.len());
    for (k, lambda) in grid.points().iter().enumerate() {
        let mut x0 = &zero;
        if opts.warm_start {
            let comp = &grid.compositions()[k];
            let mut probe = comp.clone();
            'search: for a in 0..q {
                for b in 0..q {
                    if a == b || comp[a] == 0 {
                        continue;
                    }
                    probe[a] -= 1;
                    probe[b] += 1;
                    let hit = index.get(probe.as_slice()).copied();
                    probe[a] += 1;
                    probe[b] -= 1;
                    if let Some(Some(s)) = hit.filter(|&i| i < k).map(|i| solutions[i].as_ref()) {
                        x0 = &s.x;
                        break 'search;
                    }
                }
            }
        }
        let sol = match solve_weighted_sum(problem, lambda, x0, opts) {
            Ok(s) if s.converged => Some(s),
            Ok(_) => None,
            Err(e) => {
                log::debug!("{}: grid point {k} failed: {e}", problem.name());
                None
            }
        };
        solutions.push(sol);
    }
    let out = GridSolutions {
        grid: grid.clone(),
        solutions,
    };
    let failed = out.failures();
    if failed * 10 > grid.len() {
        return Err(Error::GridSolveFailures {
            failed,
            total: grid.len(),
        });
    }
    if failed > 0 {
        log::warn!("{}: {failed} of {} grid solves failed", problem.name(), grid.len());
    }
    Ok(out)
}

/// Approximate ideal and nadir points.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealNadir<T: Real> {
    pub ideal: DVector<T>,
    pub nadir: DVector<T>,
}

impl<T: Real> IdealNadir<T> {
    pub fn ranges(&self) -> DVector<T> {
        &self.nadir - &self.ideal
    }
}

fn extremes<'a, T: Real>(q: usize, fs: impl Iterator<Item = &'a DVector<T>>) -> Option<(DVector<T>, DVector<T>)> {
    let mut acc: Option<(DVector<T>, DVector<T>)> = None;
    for f in fs {
        acc = Some(match acc {
            None => (f.clone(), f.clone()),
            Some((lo, hi)) => (lo.zip_map(f, |a, b| a.min(b)), hi.zip_map(f, |a, b| a.max(b))),
        });
    }
    acc.filter(|(lo, _)| lo.len() == q)
}

/// Componentwise min and max of `F(x(lambda))` over the solved grid.
pub fn ideal_nadir<T: Real>(solutions: &GridSolutions<T>) -> Result<IdealNadir<T>> {
    let q = solutions.grid.q();
    let (ideal, nadir) = extremes(q, solutions.solved().map(|(_, s)| &s.f_values))
        .ok_or_else(|| Error::InvalidInput("no solved grid points".into()))?;
    Ok(IdealNadir { ideal, nadir })
}

#[derive(Debug, Clone)]
pub struct SubFrontMember<T: Real> {
    /// Index into the grid.
    pub index: usize,
    pub lambda: WeightVector<T>,
    pub x: DVector<T>,
    pub f: DVector<T>,
}

#[derive(Debug, Clone)]
pub struct SubFront<T: Real> {
    pub center: WeightVector<T>,
    pub kind: NeighborhoodKind,
    /// Size actually used (the resolved alpha for adaptive mode).
    pub size: T,
    /// Sorted by grid index.
    pub members: Vec<SubFrontMember<T>>,
    /// Grid points inside the neighborhood whose solve had failed.
    pub dropped: usize,
    pub grid_size: usize,
    pub fraction_of_grid: T,
    /// Fewer than two members.
    pub degenerate: bool,
    /// More than 10% of the in-neighborhood points dropped.
    pub unreliable: bool,
}

impl<T: Real> SubFront<T> {
    fn from_indices(
        center: WeightVector<T>,
        kind: NeighborhoodKind,
        size: T,
        solutions: &GridSolutions<T>,
        mut indices: Vec<usize>,
    ) -> Self {
        indices.sort_unstable();
        indices.dedup();
        let mut members = Vec::new();
        let mut dropped = 0;
        for &i in &indices {
            match &solutions.solutions[i] {
                Some(s) => members.push(SubFrontMember {
                    index: i,
                    lambda: s.lambda.clone(),
                    x: s.x.clone(),
                    f: s.f_values.clone(),
                }),
                None => dropped += 1,
            }
        }
        let m = solutions.grid.len();
        Self {
            center,
            kind,
            size,
            fraction_of_grid: T::of_usize(members.len()) / T::of_usize(m),
            degenerate: members.len() < 2,
            unreliable: dropped * 10 > indices.len(),
            members,
            dropped,
            grid_size: m,
        }
    }

    /// Whether grid point `index` is a member.
    pub fn contains_index(&self, index: usize) -> bool {
        self.members.binary_search_by_key(&index, |m| m.index).is_ok()
    }
}

/// Solves at `center` from `x = 0` and computes the sensitivity there.
pub fn center_sensitivity<T: Real>(
    problem: &dyn MooProblem<T>,
    center: &WeightVector<T>,
    opts: &SolverOptions<T>,
) -> Result<(ScalarizedSolution<T>, SensitivityResult<T>)> {
    let sol = solve_weighted_sum(problem, center, &DVector::zeros(problem.n()), opts)?;
    let sens = sensitivity(problem, &sol)?;
    Ok((sol, sens))
}

fn inside_indices<T: Real>(nb: &Neighborhood<T>, grid: &SimplexGrid<T>) -> Vec<usize> {
    grid.points()
        .iter()
        .enumerate()
        .filter(|(_, p)| nb.contains(p))
        .map(|(i, _)| i)
        .collect()
}

/// Sub-front of a resolved neighborhood over the solved grid.
pub fn subfront_of<T: Real>(nb: &Neighborhood<T>, solutions: &GridSolutions<T>) -> SubFront<T> {
    let idx = inside_indices(nb, &solutions.grid);
    SubFront::from_indices(nb.center.clone(), nb.kind, nb.size, solutions, idx)
}

/// Resolves `spec` at `center`, computing the center sensitivity when the kind needs it.
pub fn build_neighborhood<T: Real>(
    problem: &dyn MooProblem<T>,
    spec: &NeighborhoodSpec<T>,
    center: &WeightVector<T>,
    grid: &SimplexGrid<T>,
    opts: &SolverOptions<T>,
) -> Result<Neighborhood<T>> {
    let sens = if spec.kind.needs_sensitivity() {
        Some(center_sensitivity(problem, center, opts)?.1)
    } else {
        None
    };
    Neighborhood::new(spec, center.clone(), sens, grid)
}

/// Grid points inside the neighborhood `spec` around `center`, with their solutions.
pub fn compute_subfront<T: Real>(
    problem: &dyn MooProblem<T>,
    spec: &NeighborhoodSpec<T>,
    center: &WeightVector<T>,
    solutions: &GridSolutions<T>,
    opts: &SolverOptions<T>,
) -> Result<SubFront<T>> {
    let nb = build_neighborhood(problem, spec, center, &solutions.grid, opts)?;
    Ok(subfront_of(&nb, solutions))
}

/// Most-changing metric of a sub-front together with its degeneracy flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mcm<T: Real> {
    pub value: T,
    pub degenerate: bool,
}

/// Product over objectives of the sub-front range over the full range.
///
/// Degenerate sub-fronts give zero.
pub fn compute_mcm<T: Real>(subfront: &SubFront<T>, bounds: &IdealNadir<T>) -> Result<Mcm<T>> {
    let ranges = bounds.ranges();
    for (i, (&r, &hi)) in ranges.iter().zip(bounds.nadir.iter()).enumerate() {
        if !(r > T::lit(1e-14) * hi.abs().max(T::one())) {
            return Err(Error::ZeroFullRange(i));
        }
    }
    if subfront.degenerate {
        return Ok(Mcm {
            value: T::zero(),
            degenerate: true,
        });
    }
    let q = ranges.len();
    let (lo, hi) = extremes(q, subfront.members.iter().map(|m| &m.f)).ok_or_else(|| Error::DimensionMismatch {
        expected: q,
        got: subfront.members[0].f.len(),
    })?;
    let value = (0..q).map(|i| (hi[i] - lo[i]) / ranges[i]).fold(T::one(), |a, b| a * b);
    Ok(Mcm {
        value,
        degenerate: false,
    })
}

/// Multi-center sub-front variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnionMode {
    /// One sub-front at the mean weight vector.
    CentroidWeights,
    /// One sub-front at the mean weight vector using the mean of the centers' Jacobians.
    CentroidJacobian,
    /// Set union of the per-center sub-fronts.
    Union,
}

pub fn union_subfront<T: Real>(
    problem: &dyn MooProblem<T>,
    spec: &NeighborhoodSpec<T>,
    centers: &[WeightVector<T>],
    solutions: &GridSolutions<T>,
    mode: UnionMode,
    opts: &SolverOptions<T>,
) -> Result<SubFront<T>> {
    if centers.len() < 2 {
        return Err(Error::InvalidInput("need at least two centers".into()));
    }
    let centroid = WeightVector::centroid(centers)?;
    match mode {
        UnionMode::CentroidWeights => compute_subfront(problem, spec, &centroid, solutions, opts),
        UnionMode::CentroidJacobian => {
            let sens = if spec.kind.needs_sensitivity() {
                let q = problem.q();
                let mut mean_df = DMatrix::zeros(q, q);
                let mut mean_dx = DMatrix::zeros(q, problem.n());
                for c in centers {
                    let (_, s) = center_sensitivity(problem, c, opts)?;
                    mean_df += s.df_dlambda;
                    mean_dx += s.dx_dlambda;
                }
                let k = T::of_usize(centers.len());
                mean_df /= k;
                mean_dx /= k;
                let p = pseudo_inverse(&mean_df, default_rank_tol::<T>(q));
                let condition = if p.rank == 0 {
                    T::infinity()
                } else {
                    p.singular_values[0] / p.singular_values[p.rank - 1]
                };
                Some(SensitivityResult {
                    dx_dlambda: mean_dx,
                    df_dlambda: mean_df,
                    pinv_df: p.pinv,
                    singular_values: p.singular_values,
                    rank: p.rank,
                    condition,
                })
            } else {
                None
            };
            let nb = Neighborhood::new(spec, centroid, sens, &solutions.grid)?;
            Ok(subfront_of(&nb, solutions))
        }
        UnionMode::Union => {
            let mut idx = Vec::new();
            let mut size = T::zero();
            for c in centers {
                let nb = build_neighborhood(problem, spec, c, &solutions.grid, opts)?;
                size = size.max(nb.size);
                idx.extend(inside_indices(&nb, &solutions.grid));
            }
            Ok(SubFront::from_indices(centroid, spec.kind, size, solutions, idx))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Vfm1, Zlt1q};
    use crate::scalarization::simplex_grid;

    fn w(v: &[f64]) -> WeightVector<f64> {
        WeightVector::from_slice(v).unwrap()
    }

    fn identity_sens(q: usize) -> SensitivityResult<f64> {
        SensitivityResult::from_parts(DMatrix::identity(q, q), &DMatrix::identity(q, q))
    }

    #[test]
    fn center_is_member_of_every_kind() {
        let c = w(&[0.8, 0.1, 0.1]);
        let s = identity_sens(3);
        for kind in NeighborhoodKind::ALL {
            assert!(neighborhood_contains(kind, 0.4, &c, Some(&s), &c).unwrap());
        }
    }

    #[test]
    fn identity_ellipsoid_is_a_ball() {
        let c = w(&[0.5, 0.3, 0.2]);
        let s = identity_sens(3);
        let far = w(&[0.5 + 0.2 / 2f64.sqrt(), 0.3 - 0.2 / 2f64.sqrt(), 0.2]);
        assert!(!neighborhood_contains(NeighborhoodKind::Ellipsoid, 0.1, &c, Some(&s), &far).unwrap());
        let grid = simplex_grid::<f64>(3, 0.05).unwrap();
        for p in grid.points() {
            assert_eq!(
                neighborhood_contains(NeighborhoodKind::Ellipsoid, 0.2, &c, Some(&s), p).unwrap(),
                neighborhood_contains(NeighborhoodKind::Ball, 0.2, &c, None, p).unwrap()
            );
        }
    }

    #[test]
    fn cassini_on_zlt1_centroid() {
        let p = Zlt1q::zlt1();
        let t = 1.0 / 3.0;
        let c = w(&[t, t, t]);
        let (_, s) = center_sensitivity(&p, &c, &SolverOptions::default()).unwrap();
        // |dF d| = 2 sqrt(2) h and |d|^2 = 2 h^2, so members satisfy h <= sqrt(2)/7
        for (h, inside) in [(0.1, true), (0.2, true), (0.205, false), (0.3, false)] {
            let l = w(&[t + h, t - h, t]);
            assert_eq!(
                neighborhood_contains(NeighborhoodKind::Cassini, 7.0, &c, Some(&s), &l).unwrap(),
                inside,
                "h = {h}"
            );
        }
    }

    #[test]
    fn adaptive_alpha_hand_sum() {
        let grid = simplex_grid::<f64>(2, 0.5).unwrap();
        let a = adaptive_alpha(&DMatrix::identity(2, 2), &w(&[0.5, 0.5]), &grid, 0.4).unwrap();
        assert!((a - 0.4 / 3.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            adaptive_alpha(&DMatrix::zeros(2, 2), &w(&[0.5, 0.5]), &grid, 0.4),
            Err(Error::DegenerateNeighborhood(_))
        ));
        assert!(NeighborhoodSpec::<f64>::adaptive_ellipsoid(0.0).is_err());
        assert!(NeighborhoodSpec::<f64>::fixed(NeighborhoodKind::Ball, -1.0).is_err());
    }

    #[test]
    fn zlt1_ranges_and_full_ball() {
        let p = Zlt1q::zlt1();
        let grid = simplex_grid::<f64>(3, 0.1).unwrap();
        let opts = SolverOptions::default();
        let sols = solve_grid(&p, &grid, &opts).unwrap();
        let b = ideal_nadir(&sols).unwrap();
        assert!(b.ideal.amax() < 1e-8);
        assert!((b.nadir[0] - 2.0).abs() < 1e-8);
        let spec = NeighborhoodSpec::fixed(NeighborhoodKind::Ball, 2.0).unwrap();
        let sf = compute_subfront(&p, &spec, &w(&[0.8, 0.1, 0.1]), &sols, &opts).unwrap();
        assert_eq!(sf.fraction_of_grid, 1.0);
        assert!((compute_mcm(&sf, &b).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vfm1_ideal() {
        let grid = simplex_grid::<f64>(3, 0.05).unwrap();
        let sols = solve_grid(&Vfm1::unconstrained(), &grid, &SolverOptions::default()).unwrap();
        let b = ideal_nadir(&sols).unwrap();
        assert!((b.ideal - DVector::from_vec(vec![0.0, 1.0, 2.0])).amax() < 1e-8);
    }

    #[test]
    fn warm_and_cold_grids_agree() {
        let p = Vfm1::constrained();
        let grid = simplex_grid::<f64>(3, 0.1).unwrap();
        let warm = solve_grid(&p, &grid, &SolverOptions::default()).unwrap();
        let cold = solve_grid(
            &p,
            &grid,
            &SolverOptions {
                warm_start: false,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in warm.solutions.iter().zip(&cold.solutions) {
            assert!((&a.as_ref().unwrap().x - &b.as_ref().unwrap().x).amax() < 1e-8);
        }
    }

    #[test]
    fn degenerate_subfront_scores_zero() {
        let p = Zlt1q::zlt1();
        let grid = simplex_grid::<f64>(3, 0.1).unwrap();
        let opts = SolverOptions::default();
        let sols = solve_grid(&p, &grid, &opts).unwrap();
        let spec = NeighborhoodSpec::fixed(NeighborhoodKind::Ball, 0.01).unwrap();
        let sf = compute_subfront(&p, &spec, &w(&[0.8, 0.1, 0.1]), &sols, &opts).unwrap();
        assert!(sf.degenerate);
        let m = compute_mcm(&sf, &ideal_nadir(&sols).unwrap()).unwrap();
        assert_eq!(
            m,
            Mcm {
                value: 0.0,
                degenerate: true
            }
        );
    }

    #[test]
    fn union_modes() {
        let p = Zlt1q::zlt1();
        let grid = simplex_grid::<f64>(3, 0.05).unwrap();
        let opts = SolverOptions::default();
        let sols = solve_grid(&p, &grid, &opts).unwrap();
        let spec = NeighborhoodSpec::fixed(NeighborhoodKind::Ellipsoid, 0.1).unwrap();
        let a = w(&[0.8, 0.1, 0.1]);
        let b = w(&[0.1, 0.8, 0.1]);
        let single = compute_subfront(&p, &spec, &a, &sols, &opts).unwrap();
        let same = union_subfront(&p, &spec, &[a.clone(), a.clone()], &sols, UnionMode::Union, &opts).unwrap();
        assert_eq!(
            single.members.iter().map(|m| m.index).collect::<Vec<_>>(),
            same.members.iter().map(|m| m.index).collect::<Vec<_>>()
        );
        let sb = compute_subfront(&p, &spec, &b, &sols, &opts).unwrap();
        let both = union_subfront(&p, &spec, &[a.clone(), b.clone()], &sols, UnionMode::Union, &opts).unwrap();
        assert!(both.members.len() >= single.members.len().max(sb.members.len()));
        let verts = [w(&[1.0, 0.0, 0.0]), w(&[0.0, 1.0, 0.0]), w(&[0.0, 0.0, 1.0])];
        let ball = NeighborhoodSpec::fixed(NeighborhoodKind::Ball, 0.2).unwrap();
        let cw = union_subfront(&p, &ball, &verts, &sols, UnionMode::CentroidWeights, &opts).unwrap();
        assert!((cw.center.as_vector() - DVector::from_element(3, 1.0 / 3.0)).amax() < 1e-12);
        let cj = union_subfront(&p, &spec, &[a, b], &sols, UnionMode::CentroidJacobian, &opts).unwrap();
        assert!(!cj.members.is_empty());
    }
}
