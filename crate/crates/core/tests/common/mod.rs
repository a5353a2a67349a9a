#![allow(dead_code)]

use nalgebra::DVector;
use pareto_knee::{make_problem, Problem, ProblemName, ProblemParams, SolverOptions, Weights};
use rand::rngs::StdRng;
use rand::Rng;

pub const UNCONSTRAINED: [&str; 5] = ["ZLT1", "GRV1", "VFM1", "ZLT1q", "GRV2"];

/// Registered problem with defaults (`r = 1` for DO2DK).
pub fn problem(name: &str) -> Problem {
    let mut params = ProblemParams::new();
    if name.eq_ignore_ascii_case("DO2DK") {
        params.insert("r".into(), 1.0);
    }
    make_problem::<f64>(name, &params).unwrap()
}

pub fn all_problems() -> Vec<Problem> {
    ProblemName::ALL.iter().map(|p| problem(p.as_str())).collect()
}

/// Random weights with every entry at least `floor`.
pub fn random_interior(rng: &mut StdRng, q: usize, floor: f64) -> Weights {
    let raw: Vec<f64> = (0..q).map(|_| rng.random_range(0.0..1.0) + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    let scale = 1.0 - floor * q as f64;
    let v: Vec<f64> = raw.iter().map(|r| floor + scale * r / s).collect();
    Weights::from_slice(&v).unwrap()
}

/// Tight inner tolerances for finite-difference comparisons.
pub fn accurate() -> SolverOptions<f64> {
    SolverOptions::default().with_tolerance(1e-11, 2000)
}

/// Euclidean projection onto the simplex by enumerating every support set.
pub fn project_oracle(v: &[f64]) -> Vec<f64> {
    let q = v.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << q) {
        let support: Vec<usize> = (0..q).filter(|i| mask & (1 << i) != 0).collect();
        let shift = (support.iter().map(|&i| v[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut x = vec![0.0; q];
        for &i in &support {
            x[i] = v[i] - shift;
        }
        if x.iter().any(|&xi| xi < -1e-15) {
            continue;
        }
        let d: f64 = x.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, x));
        }
    }
    best.expect("the vertex closest to v is always feasible").1
}

pub fn zeros(n: usize) -> DVector<f64> {
    DVector::zeros(n)
}
