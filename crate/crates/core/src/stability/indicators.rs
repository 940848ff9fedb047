//! Stability indicators at endemic and disease-free-patch equilibria.

use num_complex::Complex64;
use serde::Serialize;

use crate::equilibria::{Equilibrium, RESIDUAL_LIMIT};
use crate::error::{Error, Result};
use crate::linearization::{characteristic_poly3, coefficients_unchecked, jacobian_unchecked, Matrix4};
use crate::model::{Model, Variant};
use crate::poly;

/// Tolerance for the equalities in the Hopf condition sets.
pub const HOPF_EQUALITY_TOL: f64 = 1e-9;

/// Relative tolerance when comparing an expanded reference expression with its
/// Jacobian-derived counterpart.
pub const TRANSCRIPTION_TOL: f64 = 1e-8;

/// An expanded reference expression evaluated next to the value derived from the
/// Jacobian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptionCheck {
    pub name: String,
    pub from_jacobian: f64,
    pub printed: f64,
    pub matches: bool,
}

impl TranscriptionCheck {
    pub fn new(name: impl Into<String>, from_jacobian: f64, printed: f64) -> Self {
        let matches = (from_jacobian - printed).abs() <= TRANSCRIPTION_TOL * (1.0 + from_jacobian.abs());
        Self {
            name: name.into(),
            from_jacobian,
            printed,
            matches,
        }
    }
}

/// Indicators at a unidirectional coexistence point.
///
/// With the backward corridor closed the Jacobian is block lower-triangular:
/// the patch-1 block gives `lambda^2 + a1 lambda + a0` and the patch-2 block
/// has eigenvalues `(k +/- sqrt(k^2 + 4h)) / 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoexIndicators {
    /// Minus the trace of the patch-1 block.
    pub a1: f64,
    /// Determinant of the patch-1 block.
    pub a0: f64,
    /// Trace of the patch-2 block, `-gamma2 I2 - delta2 - mu2 + gamma2 S2 + r2`.
    pub k: f64,
    /// Radicand term `r2 delta2 + r2 mu2 - r2 gamma2 S2 - mu2 gamma2 I2`
    /// (minus the patch-2 determinant).
    pub h: f64,
    pub lambda34: [Complex64; 2],
    /// Max distance between the reconstructed `lambda34` and the patch-2 block eigenvalues.
    pub reconstruction_error: f64,
    pub reconstruction_consistent: bool,
    pub transcription: Vec<TranscriptionCheck>,
}

impl CoexIndicators {
    /// The four sign conditions for a stable coexistence point.
    pub fn stable(&self) -> bool {
        self.a1 > 0.0 && self.a0 > 0.0 && self.k < 0.0 && self.h < 0.0
    }
}

fn require_residual(eq: &Equilibrium) -> Result<()> {
    if eq.residual < RESIDUAL_LIMIT {
        Ok(())
    } else {
        Err(Error::ResidualTooLarge {
            residual: eq.residual,
            limit: RESIDUAL_LIMIT,
        })
    }
}

pub fn coex_indicators_unidirectional(eq: &Equilibrium, model: &Model) -> Result<CoexIndicators> {
    if model.variant() != Variant::Unidirectional {
        return Err(Error::WrongVariant {
            expected: Variant::Unidirectional,
            actual: model.variant(),
        });
    }
    require_residual(eq)?;
    let x = eq.point.to_array();
    let jac = jacobian_unchecked(&x, model);
    Ok(indicators_from_jacobian(&x, &jac, model))
}

pub(crate) fn indicators_from_jacobian(x: &[f64; 4], jac: &Matrix4, model: &Model) -> CoexIndicators {
    let p = model.params();
    let [s1, i1, s2, i2] = *x;
    let a1 = -(jac[(0, 0)] + jac[(1, 1)]);
    let a0 = jac[(0, 0)] * jac[(1, 1)] - jac[(0, 1)] * jac[(1, 0)];
    let k = -p.gamma2 * i2 - p.delta2 - p.mu2 + p.gamma2 * s2 + p.r2;
    let h = p.r2 * p.delta2 + p.r2 * p.mu2 - p.r2 * p.gamma2 * s2 - p.mu2 * p.gamma2 * i2;

    // roots of lambda^2 - k lambda - h
    let lambda34 = poly::monic_quadratic_roots(-k, -h);
    let block_trace = jac[(2, 2)] + jac[(3, 3)];
    let block_det = jac[(2, 2)] * jac[(3, 3)] - jac[(2, 3)] * jac[(3, 2)];
    let block = poly::monic_quadratic_roots(-block_trace, block_det);
    let reconstruction_error = pair_distance(&lambda34, &block);
    let reconstruction_consistent = reconstruction_error <= 1e-8 * (1.0 + block[0].norm());

    let c = coefficients_unchecked(x, model);
    let printed_a1 =
        p.gamma1 * i1 + c.eta1 - c.eta2 * s1 - p.r1 - p.gamma1 * s1 + p.delta1 + p.mu1 + c.rho1 - c.rho2 * i1;
    let printed_a0 = (-p.gamma1 * i1 - c.eta1 + p.r1) * (-p.delta1 - p.mu1 - c.rho1 + c.rho2 * i1)
        + p.gamma1 * s1 * i1 * (c.rho2 - c.eta2)
        + c.eta2 * s1 * (p.gamma1 * s1 - p.delta1 - p.mu1 - c.rho1)
        - p.delta1 * i1 * (p.gamma1 + c.rho2);

    CoexIndicators {
        a1,
        a0,
        k,
        h,
        lambda34,
        reconstruction_error,
        reconstruction_consistent,
        transcription: vec![
            TranscriptionCheck::new("a1", a1, printed_a1),
            TranscriptionCheck::new("a0", a0, printed_a0),
            TranscriptionCheck::new("k", block_trace, k),
            TranscriptionCheck::new("h", -block_det, h),
        ],
    }
}

/// Smallest max-distance between two unordered pairs.
fn pair_distance(a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
    let straight = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let crossed = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    straight.min(crossed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopfFlag {
    /// `a1 = 0, a0 > 0, k < 0, h < 0`
    pub set1: bool,
    /// `a1 > 0, a0 > 0, k = 0, h < 0`
    pub set2: bool,
    /// For `set2`: whether `(k +/- sqrt(k^2 + 4h))/2` is a purely imaginary pair.
    pub set2_pure_imaginary: Option<bool>,
}

impl HopfFlag {
    pub fn any(&self) -> bool {
        self.set1 || self.set2
    }
}

pub fn hopf_conditions(ind: &CoexIndicators) -> HopfFlag {
    hopf_conditions_raw(ind.a1, ind.a0, ind.k, ind.h)
}

pub fn hopf_conditions_raw(a1: f64, a0: f64, k: f64, h: f64) -> HopfFlag {
    let zero = |v: f64| v.abs() <= HOPF_EQUALITY_TOL;
    let set1 = zero(a1) && a0 > 0.0 && k < 0.0 && h < 0.0;
    let set2 = a1 > 0.0 && a0 > 0.0 && zero(k) && h < 0.0;
    let set2_pure_imaginary = set2.then(|| {
        let [l3, l4] = poly::monic_quadratic_roots(-k, -h);
        let tol = HOPF_EQUALITY_TOL * (1.0 + l3.norm());
        l3.re.abs() <= tol && l4.re.abs() <= tol && l3.im != 0.0 && (l3.im + l4.im).abs() <= tol
    });
    HopfFlag {
        set1,
        set2,
        set2_pure_imaginary,
    }
}

/// All roots of `lambda^3 + p2 lambda^2 + p1 lambda + p0` in the open left half-plane.
pub fn routh_hurwitz_cubic(p2: f64, p1: f64, p0: f64) -> bool {
    p0 > 0.0 && p2 > 0.0 && p2 * p1 > p0
}

/// Which patch is disease-free at a `Z` equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiseaseFreePatch {
    /// `Z1`: `I2 = 0`.
    Two,
    /// `Z2`: `I1 = 0`.
    One,
}

/// Cubic factor of the characteristic polynomial at a disease-free-patch
/// equilibrium, plus the explicit eigenvalue of the disease-free infected row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiseaseFreeCubic {
    pub patch: DiseaseFreePatch,
    pub explicit_eigenvalue: f64,
    /// `[p2, p1, p0]` from the 3x3 Jacobian block.
    pub coefficients: [f64; 3],
    /// Reference expansions evaluated at the same point.
    pub printed: [f64; 3],
    pub transcription: Vec<TranscriptionCheck>,
}

pub fn disease_free_cubic(x: &[f64; 4], model: &Model, patch: DiseaseFreePatch) -> DiseaseFreeCubic {
    let p = model.params();
    let jac = jacobian_unchecked(x, model);
    let c = coefficients_unchecked(x, model);
    let [s1, i1, s2, i2] = *x;
    let (e1, e2, t1, t2) = (c.eta1, c.eta2, c.theta1, c.theta2);
    let (g1, g2) = (p.gamma1, p.gamma2);

    let (idx, explicit, printed, label) = match patch {
        DiseaseFreePatch::Two => {
            let explicit = g2 * s2 - p.delta2 - p.mu2;
            let p2 = g1 * i1 - p.r2 - p.r1 + e1 - e2 * s1 + t1 - t2 * s2 - g1 * s1 + p.delta1 + p.mu1;
            let p1 = g1 * i1 * (g1 * s1 - p.delta1)
                + (t1 - t2 * s2) * (g1 * i1 - p.r1 - g1 * s1 + p.delta1 + p.mu1)
                + (e1 * s1 + p.r1 - g1 * i1 - e1) * (p.r2 + g1 * s1 - p.delta1 - p.mu1)
                + p.r2 * (g1 * s1 - p.delta1 - p.mu1);
            let p0 = g1 * i1 * (g1 * s1 - p.delta1) * (t1 - t2 * s2 - p.r2)
                - (g1 * s1 - p.delta1 - p.mu1)
                    * (p.r2 * (e2 * s1 + p.r1 - g1 * i1 - e1) + (g1 * i1 - p.r1) * (t1 - t2 * s2));
            ([0, 1, 2], explicit, [p2, p1, p0], "p")
        }
        DiseaseFreePatch::One => {
            let explicit = g1 * s1 - p.delta1 - p.mu1;
            let q2 = -p.r2 - p.r1 + g2 * i2 + t1 - t2 * s2 + e1 - e2 * s1 - g2 * s2 + p.delta2 + p.mu2;
            let q1 = -g2 * i2 * (-g2 * s2 + p.delta2)
                + (-e1 + e2 * s1) * (-g2 * i2 + p.r2 + g2 * s2 - p.delta2 - p.mu2)
                + (-g2 * i2 - t1 + t1 * s2 + p.r2) * (p.r1 + g2 * s2 - p.delta2 - p.mu2)
                + p.r1 * (g2 * s2 - p.delta2 - p.mu2);
            let q0 = g2 * i2 * (-g2 * s2 + p.delta2) * (-e1 + e2 * s1 + p.r1)
                - (g2 * s2 - p.delta2 - p.mu2)
                    * (p.r1 * (-g2 * i2 - t1 + t2 * s2 + p.r2) + (-g2 * i2 + p.r2) * (-e1 + e2 * s1));
            ([0, 2, 3], explicit, [q2, q1, q0], "q")
        }
    };
    let [_, c2, c1, c0] = characteristic_poly3(&jac, idx);
    let coefficients = [c2, c1, c0];
    let transcription = coefficients
        .iter()
        .zip(printed)
        .enumerate()
        .map(|(n, (&ours, theirs))| TranscriptionCheck::new(format!("{label}{}", 2 - n), ours, theirs))
        .collect();
    DiseaseFreeCubic {
        patch,
        explicit_eigenvalue: explicit,
        coefficients,
        printed,
        transcription,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{closed_form_equilibria, solve_coexistence_numeric, EquilibriumId};
    use crate::fixtures;
    use crate::linearization::{eigenvalues, jacobian_analytic};
    use crate::model::{validate, State};

    #[test]
    fn literal_hopf_sets() {
        let f = hopf_conditions_raw(0.0, 1.0, -1.0, -1.0);
        assert!(f.set1 && !f.set2);
        let f = hopf_conditions_raw(1.0, 1.0, 0.0, -1.0);
        assert!(f.set2 && !f.set1);
        assert_eq!(f.set2_pure_imaginary, Some(true));
        let f = hopf_conditions_raw(1.0, 1.0, -1.0, -1.0);
        assert!(!f.any());
        assert_eq!(f.set2_pure_imaginary, None);
    }

    #[test]
    fn cubic_criterion() {
        assert!(routh_hurwitz_cubic(3.0, 3.0, 1.0));
        assert!(!routh_hurwitz_cubic(1.0, 1.0, 2.0));
        assert!(!routh_hurwitz_cubic(1.0, 1.0, 0.0));
    }

    fn hopf_model(delta1: f64) -> Model {
        let p = fixtures::unidirectional_hopf().with("delta1", delta1).unwrap();
        validate(p, Variant::Unidirectional).unwrap()
    }

    fn interior_root(m: &Model) -> Equilibrium {
        let s = solve_coexistence_numeric(m, &[State::new(5.0, 0.5, 1.5, 2.3)]).unwrap();
        let eq = *s.interior().next().unwrap();
        eq
    }

    #[test]
    fn indicators_at_stable_unidirectional_coexistence() {
        let m = hopf_model(2.0);
        let eq = interior_root(&m);
        let ind = coex_indicators_unidirectional(&eq, &m).unwrap();
        assert!(ind.a1 > 0.0 && ind.a0 > 0.0 && ind.k < 0.0 && ind.h < 0.0);
        assert!(ind.stable());
        assert!(ind.reconstruction_consistent, "{}", ind.reconstruction_error);
        let jac = jacobian_analytic(&eq.point, &m).unwrap();
        assert!((ind.a1 + jac[(0, 0)] + jac[(1, 1)]).abs() < 1e-12);
        let spec = eigenvalues(&jac).unwrap();
        for l in ind.lambda34 {
            assert!(spec.distance_to(l) < 1e-8);
        }
    }

    #[test]
    fn printed_a1_agrees_and_a0_mismatch_is_flagged() {
        let m = hopf_model(1.0);
        let ind = coex_indicators_unidirectional(&interior_root(&m), &m).unwrap();
        let by_name = |n: &str| ind.transcription.iter().find(|t| t.name == n).unwrap().clone();
        assert!(by_name("a1").matches);
        assert!(by_name("k").matches);
        assert!(by_name("h").matches);
        // the reference a0 expansion drops gamma1*S1*(r1 - eta1)
        let a0 = by_name("a0");
        assert!(!a0.matches);
        let x = interior_root(&m).point;
        let c = coefficients_unchecked(&x.to_array(), &m);
        let missing = m.params().gamma1 * x.s1 * (m.params().r1 - c.eta1);
        assert!((a0.from_jacobian - a0.printed - missing).abs() < 1e-10);
    }

    #[test]
    fn residual_precondition() {
        let m = hopf_model(1.0);
        let mut eq = interior_root(&m);
        eq.point.s1 += 0.1;
        eq.residual = crate::equilibria::residual(&eq.point, &m);
        assert!(matches!(
            coex_indicators_unidirectional(&eq, &m),
            Err(Error::ResidualTooLarge { .. })
        ));
    }

    #[test]
    fn z1_cubic_matches_spectrum() {
        let m = validate(fixtures::z1_reference(), Variant::NoInfectedMigration).unwrap();
        let catalog = closed_form_equilibria(&m);
        for id in [EquilibriumId::Z1Plus, EquilibriumId::Z1Minus] {
            let x = catalog.get(id).unwrap().equilibrium.point;
            let cubic = disease_free_cubic(&x.to_array(), &m, DiseaseFreePatch::Two);
            assert!((cubic.explicit_eigenvalue - (x.s2 - 6.0)).abs() < 1e-14);
            let spec = eigenvalues(&jacobian_analytic(&x, &m).unwrap()).unwrap();
            assert!(spec.distance_to(Complex64::new(cubic.explicit_eigenvalue, 0.0)) < 1e-8);
            let [p2, p1, p0] = cubic.coefficients;
            for z in spec.values {
                if (z.re - cubic.explicit_eigenvalue).abs() < 1e-8 && z.im == 0.0 {
                    continue;
                }
                assert!(poly::relative_residual(&[1.0, p2, p1, p0], z) < 1e-8);
            }
            // p2 and p0 expansions are exact at Z1
            assert!(cubic.transcription[0].matches);
            assert!(cubic.transcription[2].matches);
        }
    }

    #[test]
    fn z2_cubic_matches_spectrum() {
        let m = validate(fixtures::z2_reference(), Variant::NoInfectedMigration).unwrap();
        let catalog = closed_form_equilibria(&m);
        for id in [EquilibriumId::Z2Plus, EquilibriumId::Z2Minus] {
            let x = catalog.get(id).unwrap().equilibrium.point;
            let cubic = disease_free_cubic(&x.to_array(), &m, DiseaseFreePatch::One);
            let spec = eigenvalues(&jacobian_analytic(&x, &m).unwrap()).unwrap();
            assert!(spec.distance_to(Complex64::new(cubic.explicit_eigenvalue, 0.0)) < 1e-8);
            assert!(cubic.transcription[0].matches);
        }
    }
}
