mod common;

use nalgebra::DVector;
use pareto_knee::{find_knee, mcf_value, simplex_grid, KneeMethod, KneeOptions, ProblemName, SolverOptions, Weights};

fn knee(name: &str, method: KneeMethod) -> pareto_knee::Knee {
    let p = common::problem(name);
    let start = name.parse::<ProblemName>().unwrap().default_start();
    let opts = KneeOptions::new(method, Some(Weights::from_slice(&start).unwrap()));
    find_knee::<f64>(p.as_ref(), &opts, None).unwrap()
}

#[test]
fn zlt1_knee_is_the_centroid() {
    let centroid = DVector::from_element(3, 1.0 / 3.0);
    for method in [KneeMethod::NelderMead, KneeMethod::Direct] {
        let k = knee("ZLT1", method);
        assert!(
            (k.lambda_star.as_vector() - &centroid).norm() <= 1e-2,
            "{method}: {:?}",
            k.lambda_star.as_slice()
        );
        assert!(k.mcf_star <= 1.0 + 1e-3, "{method}: {}", k.mcf_star);
    }
}

#[test]
fn zlt1_grid_minimum_confirms_centroid() {
    let p = common::problem("ZLT1");
    let grid = simplex_grid::<f64>(3, 1.0 / 30.0).unwrap();
    let (best, at) = grid
        .points()
        .iter()
        .filter_map(|l| {
            mcf_value(p.as_ref(), l, &SolverOptions::default())
                .ok()
                .map(|m| (m, l.clone()))
        })
        .fold(
            (f64::INFINITY, None),
            |acc, (m, l)| if m < acc.0 { (m, Some(l)) } else { acc },
        );
    let at = at.unwrap();
    assert!((best - 1.0).abs() <= 1e-9);
    assert!((at.as_vector() - DVector::from_element(3, 1.0 / 3.0)).norm() <= 1e-9);
}

#[test]
fn methods_agree_on_unconstrained_problems() {
    for name in common::UNCONSTRAINED {
        let nm = knee(name, KneeMethod::NelderMead);
        let di = knee(name, KneeMethod::Direct);
        let rel = (nm.mcf_star - di.mcf_star).abs() / nm.mcf_star.abs().max(di.mcf_star.abs());
        assert!(rel <= 1e-2, "{name}: NM {} vs DIRECT {}", nm.mcf_star, di.mcf_star);
    }
}

#[test]
fn direct_is_not_beaten_by_coarse_grid() {
    for name in ["GRV1", "VFM1"] {
        let p = common::problem(name);
        let di = knee(name, KneeMethod::Direct);
        let grid = simplex_grid::<f64>(3, 0.05).unwrap();
        let grid_min = grid
            .points()
            .iter()
            .filter_map(|l| mcf_value(p.as_ref(), l, &SolverOptions::default()).ok())
            .fold(f64::INFINITY, f64::min);
        assert!(
            grid_min >= di.mcf_star - 1e-3,
            "{name}: grid {grid_min} vs DIRECT {}",
            di.mcf_star
        );
    }
}

#[test]
fn traces_are_monotone_and_end_at_the_best() {
    for name in ["ZLT1", "GRV1", "VFM1constr", "DAS1"] {
        for method in [KneeMethod::NelderMead, KneeMethod::Direct] {
            let k = knee(name, method);
            assert!(!k.trace.is_empty());
            assert!(k.trace.windows(2).all(|w| w[1].mcf <= w[0].mcf), "{name} {method}");
            assert_eq!(k.trace.last().unwrap().mcf, k.mcf_star, "{name} {method}");
            assert!(k.lambda_star.as_slice().iter().all(|&l| l >= 0.0));
            assert!((k.lambda_star.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn mcm_trace_with_grid() {
    let p = common::problem("ZLT1");
    let grid = simplex_grid::<f64>(3, 0.05).unwrap();
    let sols = pareto_knee::solve_grid(p.as_ref(), &grid, &SolverOptions::default()).unwrap();
    let opts = KneeOptions::new(
        KneeMethod::NelderMead,
        Some(Weights::from_slice(&[0.8, 0.1, 0.1]).unwrap()),
    );
    let k = find_knee::<f64>(p.as_ref(), &opts, Some(&sols)).unwrap();
    for e in &k.trace {
        let m = e.mcm.expect("grid given");
        assert!((0.0..=1.0).contains(&m));
        assert!(e.alpha_used.is_some());
    }
}
