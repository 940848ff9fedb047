mod common;

use metaepi::dynamics::{
    detect_oscillation, detect_steady_state, integrate, IntegrateOptions, Sampling, Trend, DEFAULT_WINDOW,
};
use metaepi::equilibria::{
    closed_form_equilibria, newton_polish, solve_coexistence_numeric, EquilibriumId, NewtonOptions,
};
use metaepi::model::rhs;
use metaepi::stability::{classify, coex_indicators_unidirectional, hopf_conditions, Verdict};
use metaepi::{fixtures, validate, Model, State, Variant};

fn hopf_model(delta1: f64) -> Model {
    validate(
        fixtures::unidirectional_hopf().with("delta1", delta1).unwrap(),
        Variant::Unidirectional,
    )
    .unwrap()
}

fn sampled(dt: f64) -> IntegrateOptions {
    IntegrateOptions {
        sampling: Sampling::Interval(dt),
        ..Default::default()
    }
}

#[test]
fn limit_cycle_past_the_crossing() {
    let m = hopf_model(1.3);
    let root = solve_coexistence_numeric(&m, &[State::new(5.0, 0.5, 1.5, 2.3)]).unwrap();
    let eq = *root.interior().next().unwrap();
    let r = classify(&eq, &m).unwrap();
    assert_eq!(r.verdict, Verdict::Unstable);
    assert!(r.spectrum.has_complex_pair);
    assert!(r.agreement);

    // the pair grows slowly (Re ~ 4e-3), so start away from the point and run long
    let traj = integrate(&State::splat(1.0), &m, 3000.0, &sampled(0.1)).unwrap();
    let osc = detect_oscillation(&traj, 300.0);
    assert!(osc.oscillating, "{osc:?}");
    let s1 = &osc.components[0];
    assert_eq!(s1.trend, Some(Trend::Sustained));
    assert!(s1.peaks >= 4);
    assert!(detect_steady_state(&traj, &m, DEFAULT_WINDOW, 1e-6).state.is_none());
}

#[test]
fn focus_before_the_crossing_settles() {
    let m = hopf_model(1.6);
    let root = solve_coexistence_numeric(&m, &[State::new(5.0, 0.5, 1.5, 2.3)]).unwrap();
    let eq = *root.interior().next().unwrap();
    let ind = coex_indicators_unidirectional(&eq, &m).unwrap();
    assert!(ind.stable());
    assert!(!hopf_conditions(&ind).any());

    // Re of the slow pair is about -0.0125, so local error is amplified ~80x;
    // the default rtol leaves a ~1e-6 residual wobble, hence the tighter solver
    let start = State::from_array(eq.point.to_array().map(|v| v * 1.05));
    let opts = IntegrateOptions {
        rtol: 1e-11,
        atol: 1e-13,
        ..sampled(0.1)
    };
    let traj = integrate(&start, &m, 3000.0, &opts).unwrap();
    let steady = detect_steady_state(&traj, &m, DEFAULT_WINDOW, 1e-7);
    let x = steady.state.unwrap_or_else(|| panic!("{steady:?}"));
    assert!(x.distance(&eq.point) < 1e-6);
    let osc = detect_oscillation(&traj, 300.0);
    assert!(!osc.oscillating, "{osc:?}");

    // at the default tolerance the run stalls on the noise floor, still no cycle
    let traj = integrate(&start, &m, 3000.0, &sampled(0.1)).unwrap();
    assert!(!detect_oscillation(&traj, 300.0).oscillating);
}

#[test]
fn population_balance_along_a_run() {
    let m = validate(fixtures::general_reference(), Variant::General).unwrap();
    let traj = integrate(&State::new(3.0, 0.2, 0.5, 1.0), &m, 50.0, &IntegrateOptions::default()).unwrap();
    let p = m.params();
    for x in &traj.states {
        let d = rhs(x, &m).unwrap();
        let total = d.s1 + d.i1 + d.s2 + d.i2;
        let expected = p.r1 * x.s1 + p.r2 * x.s2 - p.mu1 * x.i1 - p.mu2 * x.i2;
        assert!((total - expected).abs() < 1e-10);
    }
}

#[test]
fn tighter_tolerances_move_the_endpoint_less_than_the_coarse_tolerance() {
    let m = validate(fixtures::general_reference(), Variant::General).unwrap();
    let start = State::new(0.3, 2.0, 4.0, 0.1);
    let coarse = IntegrateOptions {
        rtol: 1e-6,
        atol: 1e-8,
        ..Default::default()
    };
    let fine = IntegrateOptions {
        rtol: 5e-7,
        atol: 5e-9,
        ..Default::default()
    };
    let a = integrate(&start, &m, 100.0, &coarse).unwrap().last().unwrap().1;
    let b = integrate(&start, &m, 100.0, &fine).unwrap().last().unwrap().1;
    let scale = 1.0 + a.max_abs();
    assert!(a.distance(&b) < coarse.rtol * scale, "{:e}", a.distance(&b));
}

#[test]
fn steady_states_are_never_unstable() {
    let mut rng = common::rng(21);
    let mut detected = 0;
    for _ in 0..25 {
        let variant = common::random_variant(&mut rng);
        let m = validate(common::random_params(&mut rng, variant), variant).unwrap();
        let Ok(traj) = integrate(&common::random_state(&mut rng), &m, 500.0, &IntegrateOptions::default()) else {
            continue;
        };
        let Some(x) = detect_steady_state(&traj, &m, DEFAULT_WINDOW, 1e-7).state else {
            continue;
        };
        let polished = newton_polish(&m, &x, &NewtonOptions::default()).unwrap_or(x);
        let search = solve_coexistence_numeric(&m, &[State::from_array(polished.to_array().map(|v| v.max(1e-3)))]);
        let Some(eq) = search.ok().and_then(|s| {
            s.roots
                .into_iter()
                .min_by(|a, b| a.point.distance(&polished).total_cmp(&b.point.distance(&polished)))
        }) else {
            continue;
        };
        if eq.point.distance(&polished) > 1e-6 {
            continue;
        }
        let r = classify(&eq, &m).unwrap();
        assert_ne!(r.verdict, Verdict::Unstable, "{:?} {:?}", eq, m);
        detected += 1;
    }
    assert!(detected > 0);
}

#[test]
fn degenerate_e2_coincides_with_e1() {
    let p = fixtures::unidirectional_reference();
    assert_eq!(p.m21, p.r1 * p.a);
    let m = validate(p, Variant::Unidirectional).unwrap();
    let c = closed_form_equilibria(&m);
    let e2 = c.get(EquilibriumId::E2).unwrap();
    assert_eq!(e2.feasibility.coincides_with, Some(EquilibriumId::E1));
    assert_eq!(
        e2.equilibrium.point,
        c.get(EquilibriumId::E1).unwrap().equilibrium.point
    );
    let r = classify(&e2.equilibrium, &m).unwrap();
    assert_eq!(r.verdict, Verdict::Marginal);
    assert!(r.agreement);
}

#[test]
fn runs_are_deterministic() {
    let m = hopf_model(1.2);
    let a = integrate(&State::splat(1.0), &m, 100.0, &sampled(0.5)).unwrap();
    let b = integrate(&State::splat(1.0), &m, 100.0, &sampled(0.5)).unwrap();
    assert_eq!(a, b);
}
