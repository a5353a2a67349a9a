use anyhow::Result;
use nalgebra::DVector;
use pareto_knee::knee::{find_knee, KneeOptions};
use pareto_knee::neighborhoods::{build_neighborhood, subfront_of};
use pareto_knee::scalarization::default_grid_step;
use pareto_knee::sensitivity::{finite_difference, relative_error};
use pareto_knee::table1::{table1, Table1Report};
use pareto_knee::{
    compute_mcm, ideal_nadir, make_problem, sensitivity, simplex_grid, solve_grid, AlphaMode, KneeMethod,
    NeighborhoodKind, NeighborhoodSpec, Problem, ProblemName, ProblemParams, SolverOptions, Weights,
};
use serde_json::{json, Map, Value};

use crate::output::{cell, indexed, num, nums, opt_cell, print_json, Sink};
use crate::{
    AlphaModeArg, CheckGradArgs, Cli, Command, ConfigError, KneeArgs, List, ProblemArgs, SolverArgs, SubfrontArgs,
    Table1Args, Toggle,
};

pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::ListProblems => list_problems(),
        Command::CheckGrad(a) => check_grad(a),
        Command::Subfront(a) => subfront(a),
        Command::Knee(a) => knee(a),
        Command::Table1(a) => run_table1(a),
    }
}

fn solver_options(a: &SolverArgs) -> Result<SolverOptions<f64>> {
    let mut o = SolverOptions::default();
    if let Some(t) = a.inner_tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ConfigError(format!("--inner-tol must be positive, got {t}")).into());
        }
        o.tol_stat = t;
        o.tol_kkt = t;
    }
    if let Some(m) = a.inner_maxiter {
        if m == 0 {
            return Err(ConfigError("--inner-maxiter must be at least 1".into()).into());
        }
        o.bfgs_max_iter = m;
        o.sqp_max_iter = m;
    }
    o.warm_start = a.warm_start == Toggle::On;
    Ok(o)
}

fn build_problem(a: &ProblemArgs) -> Result<(ProblemName, Problem)> {
    let id: ProblemName = a.problem.parse()?;
    let params: ProblemParams = a.params.iter().cloned().collect();
    Ok((id, make_problem::<f64>(&a.problem, &params)?))
}

/// Given weights, or the problem's standard start (uniform weights when its length does not fit).
fn weights(given: Option<&List>, id: ProblemName, q: usize) -> Result<Weights> {
    let v = match given {
        Some(v) => v.0.clone(),
        None => {
            let d = id.default_start();
            if d.len() == q {
                d
            } else {
                vec![1.0 / q as f64; q]
            }
        }
    };
    if v.len() != q {
        return Err(pareto_knee::Error::DimensionMismatch {
            expected: q,
            got: v.len(),
        }
        .into());
    }
    Ok(Weights::from_slice(&v)?)
}

fn params_json(problem: &Problem) -> Value {
    let mut m = Map::new();
    for (k, v) in problem.params() {
        m.insert(k.to_string(), num(v));
    }
    Value::Object(m)
}

fn list_problems() -> Result<u8> {
    for id in ProblemName::ALL {
        let mut params = ProblemParams::new();
        if id == ProblemName::Do2dk {
            params.insert("r".into(), 1.0);
        }
        let p = make_problem::<f64>(id.as_str(), &params)?;
        let mut pj = params_json(&p);
        if id == ProblemName::Do2dk {
            // no default bound
            pj["r"] = Value::Null;
        }
        print_json(&json!({
            "name": id.as_str(),
            "n": p.n(),
            "q": p.q(),
            "constrained": p.is_constrained(),
            "params": pj,
        }))?;
    }
    Ok(0)
}

fn check_grad(a: CheckGradArgs) -> Result<u8> {
    let (id, p) = build_problem(&a.problem)?;
    let opts = solver_options(&a.solver)?;
    let lambda = weights(a.lambda.as_ref(), id, p.q())?;
    if a.fd_step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(ConfigError(format!("--fd-step must be positive, got {}", a.fd_step)).into());
    }
    let sink = Sink::new(a.output.out.as_deref(), a.output.format)?;
    let sol = pareto_knee::solve_weighted_sum(p.as_ref(), &lambda, &DVector::zeros(p.n()), &opts)?;
    let sens = sensitivity(p.as_ref(), &sol)?;
    let fd = finite_difference(p.as_ref(), &sol, a.fd_step, &opts)?;
    let report = json!({
        "problem": p.name(),
        "lambda": nums(lambda.as_slice()),
        "max_rel_error": num(relative_error(&sens.df_dlambda, &fd.df_dlambda)),
        "symmetric_defect": num(sens.symmetry_defect()),
        "null_vector_defect": num(sens.null_vector_defect(&lambda)),
        "active_set_stable": fd.active_set_stable,
        "singular_values": nums(sens.singular_values.as_slice()),
        "rank": sens.rank,
    });
    sink.json("check_grad.json", &report)?;
    print_json(&report)?;
    Ok(0)
}

fn subfront(a: SubfrontArgs) -> Result<u8> {
    let (id, p) = build_problem(&a.problem)?;
    let opts = solver_options(&a.solver)?;
    let q = p.q();
    let center = weights(a.center.as_ref(), id, q)?;
    let spec = match a.alpha_mode {
        AlphaModeArg::Adaptive => {
            if a.kind != NeighborhoodKind::Ellipsoid {
                return Err(ConfigError("--alpha-mode adaptive applies to --kind ellipsoid only".into()).into());
            }
            NeighborhoodSpec::adaptive_ellipsoid(a.adaptive_factor)?
        }
        AlphaModeArg::Fixed => {
            let size = a
                .size
                .ok_or_else(|| ConfigError("--size is required with a fixed neighborhood".into()))?;
            NeighborhoodSpec::new(a.kind, size, AlphaMode::Fixed)?
        }
    };
    let step = a.grid_step.unwrap_or_else(|| default_grid_step(q));
    let grid = simplex_grid::<f64>(q, step)?;
    let sink = Sink::new(a.output.out.as_deref(), a.output.format)?;

    let sols = solve_grid(p.as_ref(), &grid, &opts)?;
    let nb = build_neighborhood(p.as_ref(), &spec, &center, &grid, &opts)?;
    let sf = subfront_of(&nb, &sols);
    let mcm = compute_mcm(&sf, &ideal_nadir(&sols)?)?;

    let n = p.n();
    let header: Vec<String> = indexed("lambda", q)
        .chain(indexed("x", n))
        .chain(indexed("f", q))
        .chain(std::iter::once("member".to_string()))
        .collect();
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for (i, s) in sols.solved() {
        let member = sf.contains_index(i);
        let mut r: Vec<String> = s.lambda.as_slice().iter().map(|&v| cell(v)).collect();
        r.extend(s.x.iter().map(|&v| cell(v)));
        r.extend(s.f_values.iter().map(|&v| cell(v)));
        r.push(if member { "1" } else { "0" }.into());
        rows.push(r);
        json_rows.push(json!({
            "lambda": nums(s.lambda.as_slice()),
            "x": nums(s.x.as_slice()),
            "f": nums(s.f_values.as_slice()),
            "member": member,
        }));
    }
    sink.table("subfront", &header, &rows, json_rows)?;
    let summary = json!({
        "problem": p.name(),
        "kind": a.kind.as_str(),
        "center": nums(center.as_slice()),
        "mcm": num(mcm.value),
        "fraction": num(sf.fraction_of_grid),
        "alpha_used": num(sf.size),
        "degenerate": mcm.degenerate,
        "members": sf.members.len(),
        "dropped": sf.dropped,
        "unreliable": sf.unreliable,
        "grid_step": num(step),
        "grid_size": grid.len(),
    });
    sink.json("summary.json", &summary)?;
    print_json(&summary)?;
    Ok(0)
}

fn knee(a: KneeArgs) -> Result<u8> {
    let (id, p) = build_problem(&a.problem)?;
    let opts = solver_options(&a.solver)?;
    let q = p.q();
    let start = match a.method {
        KneeMethod::NelderMead => Some(weights(a.start.as_ref(), id, q)?),
        KneeMethod::Direct => None,
    };
    if a.budget == Some(0) {
        return Err(ConfigError("--budget must be at least 1".into()).into());
    }
    if a.alpha.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(ConfigError(format!("--alpha must be positive, got {}", a.alpha)).into());
    }
    let step = a.grid_step.unwrap_or_else(|| default_grid_step(q));
    let grid = simplex_grid::<f64>(q, step)?;
    let sink = Sink::new(a.output.out.as_deref(), a.output.format)?;

    let sols = if a.no_mcm {
        None
    } else {
        Some(solve_grid(p.as_ref(), &grid, &opts)?)
    };
    let mut ko = KneeOptions::new(a.method, start);
    ko.budget = a.budget;
    ko.alpha = a.alpha;
    ko.solver = opts;
    ko.alpha_mode = a.alpha_mode.map(|m| match m {
        AlphaModeArg::Fixed => AlphaMode::Fixed,
        AlphaModeArg::Adaptive => AlphaMode::Adaptive(a.adaptive_factor),
    });
    let r = find_knee(p.as_ref(), &ko, sols.as_ref())?;

    let header: Vec<String> = std::iter::once("iter".to_string())
        .chain(indexed("lambda", q))
        .chain(["mcf", "mcm", "alpha"].map(String::from))
        .collect();
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for e in &r.trace {
        let mut row = vec![e.iteration.to_string()];
        row.extend(e.lambda.as_slice().iter().map(|&v| cell(v)));
        row.extend([cell(e.mcf), opt_cell(e.mcm), opt_cell(e.alpha_used)]);
        rows.push(row);
        json_rows.push(json!({
            "iter": e.iteration,
            "lambda": nums(e.lambda.as_slice()),
            "mcf": num(e.mcf),
            "mcm": e.mcm.map_or(Value::Null, num),
            "alpha": e.alpha_used.map_or(Value::Null, num),
        }));
    }
    sink.table("trace", &header, &rows, json_rows)?;
    let summary = json!({
        "problem": p.name(),
        "method": r.method.as_str(),
        "start": r.start.as_ref().map_or(Value::Null, |s| nums(s.as_slice())),
        "lambda_star": nums(r.lambda_star.as_slice()),
        "x_star": nums(r.x_star.as_slice()),
        "f_star": nums(r.f_star.as_slice()),
        "mcf_star": num(r.mcf_star),
        "evaluations": r.evaluations,
        "iterations": r.trace.len(),
        "converged": r.converged,
    });
    sink.json("knee.json", &summary)?;
    print_json(&summary)?;
    Ok(0)
}

fn report_json(report: &Table1Report) -> Value {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            let m = r.outcome.as_ref().ok();
            json!({
                "problem": r.reference.problem.as_str(),
                "neighborhood": r.reference.kind.as_str(),
                "size": num(r.reference.size),
                "center": nums(&r.center),
                "grid_step": num(r.grid_step),
                "grid_size": r.grid_size,
                "mcm": m.map_or(Value::Null, |m| num(m.mcm)),
                "reference_mcm": num(r.reference.mcm),
                "mcm_rel_deviation": r.mcm_rel_deviation().map_or(Value::Null, num),
                "fraction": m.map_or(Value::Null, |m| num(m.fraction)),
                "reference_fraction": num(r.reference.fraction),
                "fraction_deviation": r.fraction_abs_deviation().map_or(Value::Null, num),
                "mcm_ok": r.mcm_ok(),
                "fraction_ok": r.fraction_ok(),
                "error": r.outcome.as_ref().err(),
            })
        })
        .collect();
    let emax: Map<String, Value> = pareto_knee::table1::PROBLEMS
        .iter()
        .map(|p| (p.as_str().to_string(), Value::Bool(report.ellipsoid_is_max(*p))))
        .collect();
    json!({
        "rows": rows,
        "ellipsoid_max": emax,
        "all_within_tolerance": report.all_within_tolerance(),
    })
}

fn run_table1(a: Table1Args) -> Result<u8> {
    let opts = solver_options(&a.solver)?;
    if let Some(step) = a.grid_step {
        for q in [3, 5] {
            simplex_grid::<f64>(q, step)?;
        }
    }
    let sink = Sink::new(a.output.out.as_deref(), a.output.format)?;
    let report = table1(a.grid_step, &opts);
    let header: Vec<String> = [
        "problem",
        "neighborhood",
        "size",
        "mcm",
        "reference_mcm",
        "mcm_rel_deviation",
        "fraction",
        "reference_fraction",
        "fraction_deviation",
        "mcm_ok",
        "fraction_ok",
        "error",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let m = r.outcome.as_ref().ok();
            vec![
                r.reference.problem.as_str().to_string(),
                r.reference.kind.as_str().to_string(),
                cell(r.reference.size),
                opt_cell(m.map(|m| m.mcm)),
                cell(r.reference.mcm),
                opt_cell(r.mcm_rel_deviation()),
                opt_cell(m.map(|m| m.fraction)),
                cell(r.reference.fraction),
                opt_cell(r.fraction_abs_deviation()),
                r.mcm_ok().to_string(),
                r.fraction_ok().to_string(),
                r.outcome.as_ref().err().cloned().unwrap_or_default(),
            ]
        })
        .collect();
    let full = report_json(&report);
    let json_rows = full["rows"].as_array().cloned().unwrap_or_default();
    sink.table("table1", &header, &rows, json_rows)?;
    sink.json("table1_summary.json", &full)?;
    print_json(&json!({
        "ellipsoid_max": full["ellipsoid_max"],
        "all_within_tolerance": full["all_within_tolerance"],
        "failed_rows": report.rows.iter().filter(|r| r.outcome.is_err()).count(),
    }))?;
    let failed = report.rows.iter().any(|r| r.outcome.is_err());
    Ok(if failed { 1 } else { 0 })
}
