mod common;

use metaepi::equilibria::{closed_form_equilibria, EquilibriumId};
use metaepi::linearization::{characteristic_poly, eigenvalues, jacobian_analytic, jacobian_fd, DEFAULT_FD_STEP};
use metaepi::model::{migration_flux, rhs};
use metaepi::poly;
use metaepi::stability::{classify, routh_hurwitz_cubic, Verdict};
use metaepi::{validate, Model, ParameterSet, State, Variant};
use proptest::prelude::*;

fn positive() -> impl Strategy<Value = f64> {
    (0.1f64.ln()..10f64.ln()).prop_map(f64::exp)
}

fn params() -> impl Strategy<Value = ParameterSet> {
    proptest::collection::vec(positive(), 14).prop_map(|v| {
        let mut p = metaepi::fixtures::general_reference();
        for (name, value) in ParameterSet::NAMES.iter().zip(v) {
            p.set(name, value).unwrap();
        }
        p
    })
}

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![
        Just(Variant::General),
        Just(Variant::Unidirectional),
        Just(Variant::NoInfectedMigration)
    ]
}

fn model() -> impl Strategy<Value = Model> {
    (params(), variant()).prop_map(|(mut p, v)| {
        for name in v.forced_zero() {
            p.set(name, 0.0).unwrap();
        }
        validate(p, v).unwrap()
    })
}

fn state() -> impl Strategy<Value = State> {
    (0.0f64..20.0, 0.0f64..20.0, 0.0f64..20.0, 0.0f64..20.0).prop_map(|(a, b, c, d)| State::new(a, b, c, d))
}

proptest! {
    #[test]
    fn migration_cancels_in_the_total(m in model(), x in state()) {
        let d = rhs(&x, &m).unwrap();
        let p = m.params();
        let total = d.s1 + d.i1 + d.s2 + d.i2;
        let expected = p.r1 * x.s1 + p.r2 * x.s2 - p.mu1 * x.i1 - p.mu2 * x.i2;
        prop_assert!((total - expected).abs() <= 1e-12 * (1.0 + expected.abs() + x.max_abs()));
    }

    #[test]
    fn corridor_fluxes_are_saturated(m in model(), x in state()) {
        let f = migration_flux(&x, &m).unwrap();
        let p = m.params();
        prop_assert!(f.sus_out_1 >= 0.0 && f.sus_out_1 < p.m21.max(f64::MIN_POSITIVE));
        prop_assert!(f.sus_in_1 >= 0.0 && f.sus_in_1 <= p.m12);
        prop_assert!(f.inf_out_1 >= 0.0 && f.inf_out_1 <= p.n21);
        prop_assert!(f.inf_in_1 >= 0.0 && f.inf_in_1 <= p.n12);
        prop_assert_eq!(f.sus_out_2(), f.sus_in_1);
        prop_assert_eq!(f.inf_in_2(), f.inf_out_1);
    }

    #[test]
    fn vector_field_points_into_the_orthant(m in model(), x in state(), face in 0usize..4) {
        let mut arr = x.to_array();
        arr[face] = 0.0;
        let d = rhs(&State::from_array(arr), &m).unwrap().to_array();
        prop_assert!(d[face] >= 0.0, "component {} derivative {}", face, d[face]);
    }

    #[test]
    fn analytic_jacobian_matches_differences(m in model(), x in state()) {
        let ja = jacobian_analytic(&x, &m).unwrap();
        let jf = jacobian_fd(&x, &m, DEFAULT_FD_STEP).unwrap();
        let scale = ja.amax().max(1.0);
        prop_assert!((ja - jf).amax() <= 1e-6 * scale);
    }

    #[test]
    fn eigenvalues_are_roots_of_the_characteristic_polynomial(m in model(), x in state()) {
        let j = jacobian_analytic(&x, &m).unwrap();
        let spec = eigenvalues(&j).unwrap();
        let c = characteristic_poly(&j);
        for z in spec.values {
            prop_assert!(poly::relative_residual(&c, z) < 1e-8);
        }
        let sum: f64 = spec.values.iter().map(|z| z.re).sum();
        prop_assert!((sum - j.trace()).abs() <= 1e-9 * (1.0 + j.amax()));
    }

    #[test]
    fn cubic_criterion_matches_roots(r in proptest::collection::vec(-3.0f64..3.0, 3)) {
        // (x - r0)(x - r1)(x - r2)
        let p2 = -(r[0] + r[1] + r[2]);
        let p1 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        let p0 = -r[0] * r[1] * r[2];
        let stable = r.iter().all(|&v| v < -1e-6);
        let unstable = r.iter().any(|&v| v > 1e-6);
        if stable {
            prop_assert!(routh_hurwitz_cubic(p2, p1, p0));
        }
        if unstable {
            prop_assert!(!routh_hurwitz_cubic(p2, p1, p0));
        }
    }

    #[test]
    fn closed_form_points_are_equilibria_and_criteria_agree(m in model()) {
        let catalog = closed_form_equilibria(&m);
        for entry in &catalog.entries {
            let eq = entry.equilibrium;
            prop_assert!(eq.residual < 1e-9, "{:?} residual {}", eq.identity, eq.residual);
            let r = classify(&eq, &m).unwrap();
            prop_assert!(r.agreement, "{:?}: {:?}", eq.identity, r.analytic_checks);
            if eq.identity == EquilibriumId::Origin {
                prop_assert_eq!(r.verdict, Verdict::Unstable);
            }
        }
    }
}
