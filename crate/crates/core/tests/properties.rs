mod common;

use std::sync::OnceLock;

use nalgebra::DVector;
use pareto_knee::dfo::{direct_optimize, nelder_mead, DirectOptions, NelderMeadOptions};
use pareto_knee::knee::mcf_from_sensitivity;
use pareto_knee::neighborhoods::IdealNadir;
use pareto_knee::{
    compute_mcm, compute_subfront, ideal_nadir, project_simplex, sensitivity, simplex_grid, solve_grid,
    solve_weighted_sum, AlphaMode, NeighborhoodKind, Problem, Solutions, SolverOptions, Spec, Weights,
};
use proptest::prelude::*;

struct Solved {
    problem: Problem,
    solutions: Solutions,
    bounds: IdealNadir<f64>,
}

const GRID_PROBLEMS: [(&str, f64); 5] = [
    ("ZLT1", 0.05),
    ("GRV1", 0.05),
    ("VFM1", 0.05),
    ("GRV2", 0.02),
    ("ZLT1q", 0.25),
];

fn solved() -> &'static [Solved] {
    static CELL: OnceLock<Vec<Solved>> = OnceLock::new();
    CELL.get_or_init(|| {
        GRID_PROBLEMS
            .iter()
            .map(|&(name, step)| {
                let problem = common::problem(name);
                let grid = simplex_grid(problem.q(), step).unwrap();
                let solutions = solve_grid(problem.as_ref(), &grid, &SolverOptions::default()).unwrap();
                let bounds = ideal_nadir(&solutions).unwrap();
                Solved {
                    problem,
                    solutions,
                    bounds,
                }
            })
            .collect()
    })
}

fn weights(raw: &[f64], q: usize) -> Weights {
    project_simplex(&DVector::from_iterator(q, raw.iter().copied()))
}

fn spec_strategy() -> impl Strategy<Value = Spec> {
    prop_oneof![
        (0.01..0.6f64).prop_map(|r| Spec::fixed(NeighborhoodKind::Ball, r).unwrap()),
        (0.005..1.0f64).prop_map(|a| Spec::fixed(NeighborhoodKind::Ellipsoid, a).unwrap()),
        (0.1..1.0f64).prop_map(|f| Spec::new(NeighborhoodKind::Ellipsoid, 0.0, AlphaMode::Adaptive(f)).unwrap()),
        (0.0005..0.5f64).prop_map(|b| Spec::fixed(NeighborhoodKind::Cassini, b).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_matches_support_enumeration(v in prop::collection::vec(-3.0..3.0f64, 1..=5)) {
        let p = project_simplex(&DVector::from_vec(v.clone()));
        let oracle = common::project_oracle(&v);
        for (a, b) in p.as_slice().iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-8, "{v:?}: {:?} vs {oracle:?}", p.as_slice());
        }
    }

    #[test]
    fn projection_is_idempotent(v in prop::collection::vec(-3.0..3.0f64, 1..=6)) {
        let p = project_simplex(&DVector::from_vec(v));
        let pp = project_simplex(p.as_vector());
        prop_assert!((p.as_vector() - pp.as_vector()).amax() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mcm_is_a_fraction(which in 0..GRID_PROBLEMS.len(), spec in spec_strategy(), raw in prop::collection::vec(0.0..1.0f64, 5)) {
        let s = &solved()[which];
        let q = s.problem.q();
        let center = weights(&raw[..q], q);
        let front = compute_subfront(s.problem.as_ref(), &spec, &center, &s.solutions, &SolverOptions::default());
        // sensitivity can fail at a vertex center
        prop_assume!(front.is_ok());
        let m = compute_mcm(&front.unwrap(), &s.bounds).unwrap();
        prop_assert!((0.0..=1.0).contains(&m.value), "{}: {}", s.problem.name(), m.value);
    }

    #[test]
    fn mcf_is_at_least_one(which in 0..8usize, raw in prop::collection::vec(0.0..1.0f64, 5)) {
        let p = common::all_problems().swap_remove(which);
        let lambda = weights(&raw[..p.q()], p.q());
        let sol = solve_weighted_sum(p.as_ref(), &lambda, &common::zeros(p.n()), &SolverOptions::default());
        prop_assume!(sol.is_ok());
        let sens = sensitivity(p.as_ref(), &sol.unwrap());
        prop_assume!(sens.is_ok());
        let m = mcf_from_sensitivity(&sens.unwrap());
        prop_assume!(!m.degenerate);
        prop_assert!(m.value >= 1.0 - 1e-12, "{} at {:?}: {}", p.name(), lambda.as_slice(), m.value);
    }

    #[test]
    fn dfo_incumbents_never_increase(
        center in prop::collection::vec(0.0..1.0f64, 2..=4),
        scale in prop::collection::vec(0.1..10.0f64, 4),
        start in prop::collection::vec(0.0..1.0f64, 4),
    ) {
        let n = center.len();
        let f = |x: &DVector<f64>| (0..n).map(|i| scale[i] * (x[i] - center[i]).powi(2)).sum::<f64>() + (3.0 * x[0]).sin();
        let nm = nelder_mead(f, &DVector::from_column_slice(&start[..n]), &NelderMeadOptions::default()).unwrap();
        let di = direct_optimize(f, &DVector::zeros(n), &DVector::from_element(n, 1.0), &DirectOptions { max_evaluations: 300, ..DirectOptions::default() }).unwrap();
        for trace in [nm, di] {
            prop_assert!(trace.iterates.windows(2).all(|w| w[1].1 <= w[0].1));
            let min = trace.iterates.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(trace.best_value, min);
            prop_assert_eq!(trace.iterates.last().unwrap().1, trace.best_value);
        }
    }
}
