use pareto_knee::table1::{table1, REFERENCE};
use pareto_knee::{ProblemName, SolverOptions};

#[test]
fn default_grids_reproduce_fractions_and_ordering() {
    let report = table1(None, &SolverOptions::default());
    assert_eq!(report.rows.len(), REFERENCE.len());
    for row in &report.rows {
        let m = row.outcome.as_ref().unwrap();
        assert!((0.0..=1.0).contains(&m.mcm));
        assert!(!m.degenerate);
        assert!(
            row.fraction_ok(),
            "{} {}: {}",
            row.reference.problem,
            row.reference.kind,
            m.fraction
        );
    }
    for name in [
        ProblemName::Zlt1,
        ProblemName::Grv1,
        ProblemName::Vfm1,
        ProblemName::Zlt1q,
    ] {
        assert!(report.ellipsoid_is_max(name), "{name}");
    }
}
