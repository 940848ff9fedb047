//! Built-in fixture suite: the reference parameter sets plus the invariant
//! checks, each with its tolerance.

use metaepi::dynamics::{integrate, IntegrateOptions, DEFAULT_HORIZON};
use metaepi::equilibria::{
    closed_form_equilibria, coexistence_closed_form_no_migrate, default_seed_grid, solve_coexistence_numeric,
    EquilibriumId, RESIDUAL_LIMIT,
};
use metaepi::linearization::{eigenvalues, jacobian_analytic, jacobian_fd, DEFAULT_FD_STEP};
use metaepi::model::rhs;
use metaepi::stability::{classify, hopf_scan, origin_factorization, origin_hopf_excluded, Channel, ScanPath, Verdict};
use metaepi::{fixtures, validate, Model, ParameterSet, State, Variant};

use crate::CliError;

type Check = Result<String, String>;

struct Fixture {
    name: &'static str,
    tolerance: &'static str,
    run: fn() -> Check,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn model(p: ParameterSet, v: Variant) -> Result<Model, String> {
    validate(p, v).map_err(|e| e.to_string())
}

fn all_fixtures() -> Vec<(Model, &'static str)> {
    [
        (fixtures::general_reference(), Variant::General, "general"),
        (
            fixtures::unidirectional_reference(),
            Variant::Unidirectional,
            "unidirectional",
        ),
        (fixtures::z1_reference(), Variant::NoInfectedMigration, "Z1"),
        (fixtures::z2_reference(), Variant::NoInfectedMigration, "Z2"),
        (
            fixtures::no_migrate_coexistence(),
            Variant::NoInfectedMigration,
            "no-migrate",
        ),
        (fixtures::unidirectional_hopf(), Variant::Unidirectional, "hopf"),
    ]
    .into_iter()
    .map(|(p, v, name)| (validate(p, v).expect("fixtures are valid"), name))
    .collect()
}

/// Deterministic spread of states over `[0, 10]^4`, including faces.
fn probe_states() -> Vec<State> {
    let vals = [0.0, 0.3, 1.5, 7.0];
    let mut out = Vec::new();
    for (i, &a) in vals.iter().enumerate() {
        for (j, &b) in vals.iter().enumerate() {
            out.push(State::new(a, b, vals[(i + j) % 4], vals[(i + 2 * j + 1) % 4]));
        }
    }
    out
}

fn origin() -> Check {
    let m = model(fixtures::general_reference(), Variant::General)?;
    let f = origin_factorization(&m);
    ensure(f.h == [1.0, 0.0, -1.0], || format!("H = {:?}", f.h))?;
    let spec = eigenvalues(&jacobian_analytic(&State::default(), &m).unwrap()).map_err(|e| e.to_string())?;
    ensure(spec.matches(&f.roots(), 1e-8), || {
        "roots(H) and roots(K) differ from the spectrum".into()
    })?;
    for (m, name) in all_fixtures() {
        let eq = closed_form_equilibria(&m)
            .get(EquilibriumId::Origin)
            .unwrap()
            .equilibrium;
        let r = classify(&eq, &m).map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::Unstable, || {
            format!("{name}: origin {:?}", r.verdict)
        })?;
    }
    Ok("H = x^2 - 1, origin unstable on every fixture".into())
}

fn general_convergence() -> Check {
    let m = model(fixtures::general_reference(), Variant::General)?;
    let traj = integrate(&State::splat(1.0), &m, 200.0, &IntegrateOptions::default()).map_err(|e| e.to_string())?;
    let (_, end) = traj.last().unwrap();
    let d = end.distance(&State::splat(1.5));
    ensure(d < 1e-6, || format!("x(200) is {d:.1e} from (1.5, 1.5, 1.5, 1.5)"))?;
    let spec = eigenvalues(&jacobian_analytic(&State::splat(1.5), &m).unwrap()).map_err(|e| e.to_string())?;
    ensure(spec.max_real_part < 0.0, || format!("max Re {}", spec.max_real_part))?;
    Ok(format!("|x(200) - 1.5| = {d:.1e}, max Re = {:.4}", spec.max_real_part))
}

fn disease_free(p: ParameterSet, ids: [EquilibriumId; 2], infected: usize) -> Check {
    let m = model(p, Variant::NoInfectedMigration)?;
    let catalog = closed_form_equilibria(&m);
    let mut stable = None;
    for id in ids {
        let eq = catalog.get(id).ok_or(format!("{id:?} missing"))?.equilibrium;
        ensure(eq.residual < RESIDUAL_LIMIT, || {
            format!("{id:?} residual {:e}", eq.residual)
        })?;
        let r = classify(&eq, &m).map_err(|e| e.to_string())?;
        ensure(r.agreement, || format!("{id:?}: criterion and spectrum disagree"))?;
        if r.verdict == Verdict::Stable && r.criterion_verdict == Some(true) {
            stable = Some((id, eq));
        }
    }
    let (id, eq) = stable.ok_or("no branch stable with the cubic criterion satisfied")?;
    let start = State::from_array(eq.point.to_array().map(|v| v * 1.05 + 0.05));
    let traj = integrate(&start, &m, DEFAULT_HORIZON, &IntegrateOptions::default()).map_err(|e| e.to_string())?;
    let inf = traj.last().unwrap().1.to_array()[infected];
    ensure(inf < 1e-8, || format!("infected component ends at {inf:e}"))?;
    Ok(format!("{id:?} stable, run ends with infected {inf:.1e}"))
}

fn z1() -> Check {
    let m = model(fixtures::z1_reference(), Variant::NoInfectedMigration)?;
    let c = closed_form_equilibria(&m);
    let f = c.get(EquilibriumId::Z1Plus).ok_or("Z1+ missing")?.feasibility.clone();
    ensure(f.ell == Some(46.0) && f.discriminant == Some(964.0), || {
        format!("ell = {:?}, discriminant = {:?}", f.ell, f.discriminant)
    })?;
    disease_free(
        fixtures::z1_reference(),
        [EquilibriumId::Z1Plus, EquilibriumId::Z1Minus],
        3,
    )
}

fn z2() -> Check {
    disease_free(
        fixtures::z2_reference(),
        [EquilibriumId::Z2Plus, EquilibriumId::Z2Minus],
        1,
    )
}

fn no_migrate() -> Check {
    let m = model(fixtures::no_migrate_coexistence(), Variant::NoInfectedMigration)?;
    let closed = coexistence_closed_form_no_migrate(&m).map_err(|e| e.to_string())?;
    let search = solve_coexistence_numeric(&m, &default_seed_grid()).map_err(|e| e.to_string())?;
    let d = search
        .interior()
        .map(|e| e.point.distance(&closed.equilibrium.point))
        .fold(f64::INFINITY, f64::min);
    ensure(closed.equilibrium.point.distance(&State::splat(1.5)) < 1e-12, || {
        "closed form off".into()
    })?;
    ensure(d < 1e-8, || format!("numeric root {d:.1e} away"))?;
    ensure(closed.feasibility.feasible, || "infeasible".into())?;
    Ok(format!("closed form (1.5, 1.5, 1.5, 1.5), numeric within {d:.1e}"))
}

fn degenerate_e2() -> Check {
    let m = model(fixtures::unidirectional_reference(), Variant::Unidirectional)?;
    let c = closed_form_equilibria(&m);
    let e2 = c.get(EquilibriumId::E2).ok_or("E2 missing")?;
    ensure(e2.feasibility.coincides_with == Some(EquilibriumId::E1), || {
        "E2 not flagged coincident".into()
    })?;
    let r = classify(&e2.equilibrium, &m).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::Marginal, || format!("verdict {:?}", r.verdict))?;
    Ok("E2 coincides with E1, marginal".into())
}

fn flux_antisymmetry() -> Check {
    let mut worst = 0.0_f64;
    for (m, _) in all_fixtures() {
        let p = m.params();
        for x in probe_states() {
            let d = rhs(&x, &m).map_err(|e| e.to_string())?;
            let expected = p.r1 * x.s1 + p.r2 * x.s2 - p.mu1 * x.i1 - p.mu2 * x.i2;
            let err = (d.s1 + d.i1 + d.s2 + d.i2 - expected).abs() / (1.0 + expected.abs());
            worst = worst.max(err);
        }
    }
    ensure(worst < 1e-12, || format!("error {worst:e}"))?;
    Ok(format!("worst {worst:.1e}"))
}

fn jacobian() -> Check {
    let mut worst = 0.0_f64;
    for (m, name) in all_fixtures() {
        for x in probe_states() {
            let ja = jacobian_analytic(&x, &m).map_err(|e| e.to_string())?;
            let jf = jacobian_fd(&x, &m, DEFAULT_FD_STEP).map_err(|e| e.to_string())?;
            let scale = ja.amax();
            for (a, f) in ja.iter().zip(jf.iter()) {
                worst = worst.max((a - f).abs() / a.abs().max(1e-6 * scale));
            }
            ensure(worst < 1e-5, || format!("{name} at {x:?}: {worst:e}"))?;
        }
    }
    Ok(format!("worst relative entry error {worst:.1e}"))
}

fn origin_hopf() -> Check {
    for (m, name) in all_fixtures() {
        let p = m.params();
        let c = origin_hopf_excluded(p);
        ensure(c.excluded && c.vertex_value <= 0.0, || format!("{name}: {c:?}"))?;
        if p.m12 > 0.0 && p.m21 > 0.0 {
            ensure(c.vertex_value < 0.0, || format!("{name}: vertex {}", c.vertex_value))?;
        }
    }
    Ok("vertex value <= 0 on every fixture".into())
}

fn hopf_detector() -> Check {
    let m = model(fixtures::unidirectional_hopf(), Variant::Unidirectional)?;
    let path = ScanPath {
        parameter: "delta1".into(),
        start: 0.5,
        end: 2.0,
        steps: 30,
    };
    let scan = hopf_scan(&m, &path).map_err(|e| e.to_string())?;
    let ind: Vec<_> = scan.channel(Channel::Indicator).collect();
    let spec: Vec<_> = scan.channel(Channel::Spectral).collect();
    ensure(ind.len() == 1 && spec.len() == 1, || {
        format!("{} / {} crossings", ind.len(), spec.len())
    })?;
    let (a, b) = (ind[0], spec[0]);
    ensure(a.agreement && b.agreement, || "channels disagree".into())?;
    for c in [a, b] {
        let width = (c.upper - c.lower) / c.upper.abs();
        ensure(c.refined && width <= 1e-6, || {
            format!("{:?} width {width:e}", c.channel)
        })?;
    }
    Ok(format!(
        "delta1 = {:.6} (indicator), {:.6} (spectral)",
        a.value, b.value
    ))
}

const FIXTURES: [Fixture; 11] = [
    Fixture {
        name: "origin-factorization",
        tolerance: "spectrum match 1e-8",
        run: origin,
    },
    Fixture {
        name: "origin-roots-all-fixtures",
        tolerance: "spectrum match 1e-8",
        run: origin_roots_everywhere,
    },
    Fixture {
        name: "general-convergence",
        tolerance: "|x(200) - 1.5| < 1e-6",
        run: general_convergence,
    },
    Fixture {
        name: "z1-branch",
        tolerance: "residual < 1e-9, I2 < 1e-8",
        run: z1,
    },
    Fixture {
        name: "z2-branch",
        tolerance: "residual < 1e-9, I1 < 1e-8",
        run: z2,
    },
    Fixture {
        name: "no-migrate-coexistence",
        tolerance: "closed vs numeric 1e-8",
        run: no_migrate,
    },
    Fixture {
        name: "degenerate-e2",
        tolerance: "exact coincidence",
        run: degenerate_e2,
    },
    Fixture {
        name: "flux-antisymmetry",
        tolerance: "relative 1e-12",
        run: flux_antisymmetry,
    },
    Fixture {
        name: "jacobian",
        tolerance: "relative entry 1e-5",
        run: jacobian,
    },
    Fixture {
        name: "origin-hopf-exclusion",
        tolerance: "sign only",
        run: origin_hopf,
    },
    Fixture {
        name: "hopf-detector",
        tolerance: "one grid cell, width 1e-6",
        run: hopf_detector,
    },
];

fn origin_roots_everywhere() -> Check {
    for (m, name) in all_fixtures() {
        let spec = eigenvalues(&jacobian_analytic(&State::default(), &m).unwrap()).map_err(|e| e.to_string())?;
        ensure(spec.matches(&origin_factorization(&m).roots(), 1e-8), || {
            format!("{name}: mismatch")
        })?;
    }
    Ok("roots(H) and roots(K) match the origin spectrum on every fixture".into())
}

/// Runs every fixture, printing one line each; fails naming the first failure.
pub fn run() -> Result<(), CliError> {
    let mut first_failure = None;
    for f in &FIXTURES {
        match (f.run)() {
            Ok(detail) => println!("PASS {} [{}]: {detail}", f.name, f.tolerance),
            Err(detail) => {
                println!("FAIL {} [{}]: {detail}", f.name, f.tolerance);
                first_failure.get_or_insert(f.name);
            }
        }
    }
    match first_failure {
        None => Ok(()),
        Some(name) => Err(CliError::Verification(name.to_string())),
    }
}
