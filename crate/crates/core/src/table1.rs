//! Ball / ellipsoid / Cassini comparison on the four unconstrained benchmarks.

use crate::error::{Error, Result};
use crate::inner_solvers::SolverOptions;
use crate::neighborhoods::{
    compute_mcm, compute_subfront, ideal_nadir, solve_grid, GridSolutions, NeighborhoodKind, NeighborhoodSpec,
};
use crate::problems::{make_problem, ProblemName, ProblemParams};
use crate::scalarization::{default_grid_step, simplex_grid, WeightVector};

/// Relative MCM tolerance; the absolute floor is [`MCM_ABS_TOL`].
pub const MCM_REL_TOL: f64 = 0.25;
pub const MCM_ABS_TOL: f64 = 0.02;
pub const FRACTION_ABS_TOL: f64 = 0.05;

/// One published row: problem, neighborhood, size and the printed MCM / fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub problem: ProblemName,
    pub kind: NeighborhoodKind,
    pub size: f64,
    pub mcm: f64,
    pub fraction: f64,
}

const fn row(problem: ProblemName, kind: NeighborhoodKind, size: f64, mcm: f64, fraction: f64) -> ReferenceRow {
    ReferenceRow {
        problem,
        kind,
        size,
        mcm,
        fraction,
    }
}

use NeighborhoodKind::{Ball, Cassini, Ellipsoid};
use ProblemName::{Grv1, Vfm1, Zlt1, Zlt1q};

pub const REFERENCE: [ReferenceRow; 12] = [
    row(Zlt1, Ball, 0.40, 0.0895, 0.2392),
    row(Zlt1, Ellipsoid, 0.10, 0.1529, 0.2329),
    row(Zlt1, Cassini, 7.0, 0.0837, 0.2251),
    row(Grv1, Ball, 0.30, 0.0136, 0.1702),
    row(Grv1, Ellipsoid, 0.10, 0.1078, 0.1639),
    row(Grv1, Cassini, 10.0, 0.0252, 0.1749),
    row(Vfm1, Ball, 0.23, 0.0260, 0.1788),
    row(Vfm1, Ellipsoid, 0.10, 0.0824, 0.1804),
    row(Vfm1, Cassini, 13.0, 0.0546, 0.1859),
    row(Zlt1q, Ball, 0.28, 0.0111, 0.1026),
    row(Zlt1q, Ellipsoid, 0.10, 0.0974, 0.0948),
    row(Zlt1q, Cassini, 8.5, 0.0176, 0.1007),
];

pub const PROBLEMS: [ProblemName; 4] = [Zlt1, Grv1, Vfm1, Zlt1q];

#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub mcm: f64,
    pub fraction: f64,
    pub members: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub reference: ReferenceRow,
    pub center: Vec<f64>,
    pub grid_step: f64,
    pub grid_size: usize,
    /// Error message when the row could not be computed.
    pub outcome: std::result::Result<Measured, String>,
}

impl Table1Row {
    /// `(measured - reference) / reference` for the MCM.
    pub fn mcm_rel_deviation(&self) -> Option<f64> {
        let m = self.outcome.as_ref().ok()?;
        Some((m.mcm - self.reference.mcm) / self.reference.mcm)
    }

    pub fn fraction_abs_deviation(&self) -> Option<f64> {
        let m = self.outcome.as_ref().ok()?;
        Some(m.fraction - self.reference.fraction)
    }

    pub fn mcm_ok(&self) -> bool {
        self.outcome.as_ref().is_ok_and(|m| {
            let tol = (MCM_REL_TOL * self.reference.mcm).max(MCM_ABS_TOL);
            (m.mcm - self.reference.mcm).abs() <= tol
        })
    }

    pub fn fraction_ok(&self) -> bool {
        self.fraction_abs_deviation()
            .is_some_and(|d| d.abs() <= FRACTION_ABS_TOL)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Report {
    pub rows: Vec<Table1Row>,
}

impl Table1Report {
    /// Whether the ellipsoid MCM strictly exceeds both others for `problem`.
    pub fn ellipsoid_is_max(&self, problem: ProblemName) -> bool {
        let mcm = |kind| {
            self.rows
                .iter()
                .find(|r| r.reference.problem == problem && r.reference.kind == kind)
                .and_then(|r| r.outcome.as_ref().ok())
                .map(|m| m.mcm)
        };
        match (mcm(Ellipsoid), mcm(Ball), mcm(Cassini)) {
            (Some(e), Some(b), Some(c)) => e > b && e > c,
            _ => false,
        }
    }

    pub fn all_within_tolerance(&self) -> bool {
        self.rows.iter().all(|r| r.mcm_ok() && r.fraction_ok())
    }
}

fn run_problem(
    name: ProblemName,
    step: f64,
    opts: &SolverOptions<f64>,
) -> Result<(GridSolutions<f64>, Box<dyn crate::problems::MooProblem<f64>>)> {
    let problem = make_problem::<f64>(name.as_str(), &ProblemParams::new())?;
    let grid = simplex_grid(problem.q(), step)?;
    let sols = solve_grid(problem.as_ref(), &grid, opts)?;
    Ok((sols, problem))
}

/// Computes all twelve rows at the published sizes and centers.
///
/// `grid_step = None` uses [`default_grid_step`] per problem. A failing row
/// records its error and the remaining rows are still computed.
pub fn table1(grid_step: Option<f64>, opts: &SolverOptions<f64>) -> Table1Report {
    let mut rows = Vec::with_capacity(REFERENCE.len());
    for name in PROBLEMS {
        let center = name.default_start();
        let q = center.len();
        let step = grid_step.unwrap_or_else(|| default_grid_step(q));
        let refs = REFERENCE.iter().filter(|r| r.problem == name);
        let solved = run_problem(name, step, opts);
        for reference in refs {
            let outcome = match &solved {
                Ok((sols, problem)) => {
                    measure(problem.as_ref(), sols, reference, &center, opts).map_err(|e| e.to_string())
                }
                Err(e) => Err(e.to_string()),
            };
            if let Err(e) = &outcome {
                log::error!("{} {}: {e}", name, reference.kind);
            }
            rows.push(Table1Row {
                reference: *reference,
                center: center.clone(),
                grid_step: step,
                grid_size: solved.as_ref().map_or(0, |(s, _)| s.grid.len()),
                outcome,
            });
        }
    }
    Table1Report { rows }
}

fn measure(
    problem: &dyn crate::problems::MooProblem<f64>,
    sols: &GridSolutions<f64>,
    reference: &ReferenceRow,
    center: &[f64],
    opts: &SolverOptions<f64>,
) -> Result<Measured> {
    let center = WeightVector::from_slice(center)?;
    let spec = NeighborhoodSpec::fixed(reference.kind, reference.size)?;
    let sf = compute_subfront(problem, &spec, &center, sols, opts)?;
    let bounds = ideal_nadir(sols)?;
    let mcm = compute_mcm(&sf, &bounds)?;
    if sf.unreliable {
        return Err(Error::GridSolveFailures {
            failed: sf.dropped,
            total: sf.members.len() + sf.dropped,
        });
    }
    Ok(Measured {
        mcm: mcm.value,
        fraction: sf.fraction_of_grid,
        members: sf.members.len(),
        degenerate: mcm.degenerate,
    })
}
