use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use metaepi::dynamics::{detect_oscillation, detect_steady_state, integrate_with};
use metaepi::equilibria::{
    closed_form_equilibria, newton_polish, residual, seed_grid, solve_coexistence_numeric, Equilibrium, EquilibriumId,
    NewtonOptions, Provenance,
};
use metaepi::stability::{classify, hopf_scan, Verdict};
use metaepi::{validate, Error, Model, State};

use crate::config::ScenarioConfig;
use crate::csv;
use crate::report::{
    numeric_equilibrium, EquilibriaSection, EquilibriumEntry, RunReport, ScanSection, TrajectorySummary,
};
use crate::CliError;

/// Distance under which a Newton root is reported as the closed-form entry it lands on.
const SAME_POINT: f64 = 1e-8;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

pub fn simulate(config: &ScenarioConfig, out: &Path) -> Result<RunReport, CliError> {
    let model = config.model()?;
    let initial = config
        .initial
        .ok_or_else(|| CliError::Config("simulate needs an [initial] state".into()))?;
    let solver = &config.solver;
    let csv_path = out.join("trajectory.csv");
    let mut w = create(&csv_path)?;
    let mut write_error = writeln!(w, "{}", csv::TRAJECTORY_HEADER).err();
    let result = integrate_with(&initial, &model, solver.t_end, &solver.integrate_options(), |t, x| {
        if write_error.is_none() {
            write_error = writeln!(w, "{}", csv::trajectory_row(t, x)).err();
        }
    });
    // flush whatever was produced before looking at the solver outcome
    let flushed = w.flush();
    if let Some(e) = write_error.or(flushed.err()) {
        return Err(CliError::io(&csv_path, e));
    }
    let traj = result.map_err(|e| match e {
        Error::InvalidHorizon(_)
        | Error::InvalidSolverOption(_)
        | Error::NegativeState { .. }
        | Error::NonFiniteState => CliError::Config(e.to_string()),
        e => CliError::Numeric(format!("{e} (partial trajectory kept in {})", csv_path.display())),
    })?;

    let (_, final_state) = traj.last().expect("trajectory has the initial sample");
    let steady_state = detect_steady_state(&traj, &model, solver.window, solver.steady_tol);
    let converged_to = steady_state.state.map(|x| {
        let polished = newton_polish(&model, &x, &NewtonOptions::default()).unwrap_or(x);
        EquilibriumEntry::new(numeric_equilibrium(polished, &model), None, &model)
    });
    let mut report = RunReport::new("simulate", config);
    report.trajectory = Some(TrajectorySummary {
        t_end: solver.t_end,
        samples: traj.times.len(),
        final_state,
        min_component: traj.min_component(),
        stats: traj.stats,
        steady_state,
        converged_to,
        oscillation: detect_oscillation(&traj, solver.window),
    });
    Ok(report)
}

pub fn equilibria(config: &ScenarioConfig) -> Result<RunReport, CliError> {
    let model = config.model()?;
    let seeds = seed_grid(&config.solver.seed_grid);
    if seeds.is_empty() {
        return Err(CliError::Config("seed_grid is empty".into()));
    }
    let catalog = closed_form_equilibria(&model);
    let search = solve_coexistence_numeric(&model, &seeds).map_err(|e| match e {
        Error::NonPositiveSeed { .. } => CliError::Config(format!("seed_grid: {e}")),
        e => CliError::Numeric(e.to_string()),
    })?;

    let closed_form: Vec<EquilibriumEntry> = catalog
        .entries
        .iter()
        .map(|c| EquilibriumEntry::new(c.equilibrium, Some(c.feasibility.clone()), &model))
        .collect();
    let numeric = search
        .roots
        .iter()
        .map(|eq| {
            let mut entry = EquilibriumEntry::new(*eq, None, &model);
            entry.matches = catalog
                .entries
                .iter()
                .filter(|c| c.feasibility.coincides_with.is_none())
                .find(|c| c.equilibrium.point.distance(&eq.point) < SAME_POINT)
                .map(|c| c.equilibrium.identity);
            entry
        })
        .collect();

    let mut report = RunReport::new("equilibria", config);
    report.equilibria = Some(EquilibriaSection {
        closed_form,
        complex_branches: catalog.complex_branches,
        numeric,
        seeds: seeds.len(),
        seed_failures: search.failures.len(),
        discarded_infeasible: search.discarded_infeasible,
        notes: catalog.notes,
    });
    Ok(report)
}

fn scan_verdict(model: &Model, parameter: &str, value: f64, point: State) -> Option<Verdict> {
    let p = model.params().with(parameter, value).ok()?;
    let m = validate(p, model.variant()).ok()?;
    let eq = Equilibrium {
        point,
        identity: EquilibriumId::CoexistenceNumeric,
        feasible: true,
        provenance: Provenance::NewtonSolve,
        residual: residual(&point, &m),
    };
    classify(&eq, &m).ok().map(|r| r.verdict)
}

pub fn scan(config: &ScenarioConfig, out: &Path) -> Result<RunReport, CliError> {
    let model = config.model()?;
    let path = config
        .scan
        .clone()
        .ok_or_else(|| CliError::Config("scan needs a [scan] table".into()))?;
    let result = hopf_scan(&model, &path).map_err(|e| match e {
        Error::WrongVariant { .. } | Error::UnknownParameter(_) | Error::InvalidPath(_) => {
            CliError::Config(format!("scan: {e}"))
        }
        e => CliError::Numeric(e.to_string()),
    })?;
    let verdicts: Vec<_> = result
        .points
        .iter()
        .map(|p| {
            p.equilibrium
                .and_then(|x| scan_verdict(&model, &path.parameter, p.value, x))
        })
        .collect();

    let csv_path = out.join("scan.csv");
    let mut w = create(&csv_path)?;
    let mut text = csv::scan_header(&path.parameter);
    text.push('\n');
    for (p, v) in result.points.iter().zip(&verdicts) {
        text.push_str(&csv::scan_row(p, *v));
        text.push('\n');
    }
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&csv_path, e))?;

    let mut report = RunReport::new("scan", config);
    report.scan = Some(ScanSection {
        path: result.path,
        points: result.points.len(),
        crossings: result.crossings,
        gaps: result.gaps,
        verdicts,
    });
    Ok(report)
}
