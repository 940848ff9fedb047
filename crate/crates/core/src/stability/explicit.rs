//! Closed-form spectra at the unidirectional boundary equilibria.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linearization::EigenSpectrum;
use crate::model::{Model, Variant};

fn require_unidirectional(model: &Model) -> Result<()> {
    if model.variant() == Variant::Unidirectional {
        Ok(())
    } else {
        Err(Error::WrongVariant {
            expected: Variant::Unidirectional,
            actual: model.variant(),
        })
    }
}

/// `(-b +/- sqrt(b^2 - 4 a c)) / (2 a)` with a complex square root.
fn quadratic_formula(a: f64, b: f64, c: f64) -> [Complex64; 2] {
    let disc = Complex64::new(b * b - 4.0 * a * c, 0.0).sqrt();
    let minus_b = Complex64::new(-b, 0.0);
    [(minus_b + disc) / (2.0 * a), (minus_b - disc) / (2.0 * a)]
}

/// Eigenvalues at `E1 = (0, 0, S2, I2)`:
/// the patch-2 pair, `(r1 A - m21)/A` and `-((delta1 + mu1) B + n21)/B`.
pub fn explicit_eigen_e1(model: &Model) -> Result<EigenSpectrum> {
    require_unidirectional(model)?;
    let p = model.params();
    // printed form: (-r2 d2 +/- sqrt(r2^2 d2^2 - 4 mu2^2 r2 (mu2 + d2))) / (2 mu2)
    let [l1, l2] = quadratic_formula(p.mu2, p.r2 * p.delta2, p.mu2 * p.r2 * (p.mu2 + p.delta2));
    let l3 = (-p.m21 + p.r1 * p.a) / p.a;
    let l4 = -((p.delta1 + p.mu1) * p.b + p.n21) / p.b;
    Ok(EigenSpectrum::from_values([
        l1,
        l2,
        Complex64::new(l3, 0.0),
        Complex64::new(l4, 0.0),
    ]))
}

/// Eigenvalues at `E2 = (S1, 0, S2, I2)`; the second one in its reduced form
/// `r1 (m21 - r1 A) / m21`.
pub fn explicit_eigen_e2(model: &Model) -> Result<EigenSpectrum> {
    require_unidirectional(model)?;
    let p = model.params();
    if p.m21 < p.r1 * p.a || p.m21 == 0.0 {
        return Err(Error::InfeasibleEquilibrium);
    }
    let s1 = (p.m21 - p.r1 * p.a) / p.r1;
    let i2 = (p.gamma2 * (p.m21 - p.r1 * p.a) + p.r2 * (p.delta2 + p.mu2)) / (p.gamma2 * p.mu2);
    let l1 = p.gamma1 * s1 - p.delta1 - p.mu1 - p.n21 / (p.b + s1);
    let l2 = p.r1 * (p.m21 - p.r1 * p.a) / p.m21;
    let trace = p.r2 - p.gamma2 * i2;
    let [l3, l4] = quadratic_formula(1.0, -trace, p.mu2 * p.gamma2 * i2);
    Ok(EigenSpectrum::from_values([
        Complex64::new(l1, 0.0),
        Complex64::new(l2, 0.0),
        l3,
        l4,
    ]))
}

/// The unreduced second eigenvalue at `E2`, `-m21/(A+S1) + m21 S1/(A+S1)^2 + r1`.
pub fn e2_growth_eigenvalue_unreduced(model: &Model) -> f64 {
    let p = model.params();
    let s1 = (p.m21 - p.r1 * p.a) / p.r1;
    let d = p.a + s1;
    -p.m21 / d + p.m21 * s1 / (d * d) + p.r1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{closed_form_equilibria, EquilibriumId};
    use crate::fixtures;
    use crate::linearization::{eigenvalues, jacobian_analytic};
    use crate::model::validate;

    fn uni(m21: f64) -> Model {
        let p = fixtures::unidirectional_reference().with("m21", m21).unwrap();
        validate(p, Variant::Unidirectional).unwrap()
    }

    #[test]
    fn e1_reference_eigenvalues() {
        let s = explicit_eigen_e1(&uni(2.0)).unwrap();
        let reals: Vec<f64> = s.values.iter().filter(|v| v.im == 0.0).map(|v| v.re).collect();
        assert!(reals.contains(&-1.0));
        assert!(reals.iter().any(|v| (v + 1.6).abs() < 1e-15));
        // (-0.5 +/- sqrt(0.25 - 6)) / 2
        let pair: Vec<&Complex64> = s.values.iter().filter(|v| v.im != 0.0).collect();
        assert_eq!(pair.len(), 2);
        assert_eq!(pair[0].re, -0.25);
        assert!((pair[0].im.abs() - 5.75f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(s.max_real_part < 0.0);
    }

    #[test]
    fn printed_spectra_match_jacobian() {
        for m21 in [1.5, 2.0, 4.0] {
            let m = uni(m21);
            let catalog = closed_form_equilibria(&m);
            for (id, explicit) in [
                (EquilibriumId::E1, explicit_eigen_e1(&m).unwrap()),
                (EquilibriumId::E2, explicit_eigen_e2(&m).unwrap()),
            ] {
                let pt = catalog.get(id).unwrap().equilibrium.point;
                let spec = eigenvalues(&jacobian_analytic(&pt, &m).unwrap()).unwrap();
                assert!(spec.matches(&explicit.values, 1e-8), "{id:?} {spec:?} {explicit:?}");
            }
        }
    }

    #[test]
    fn e2_growth_eigenvalue_reduction() {
        for m21 in [1.0, 1.7, 3.0, 10.0] {
            let m = uni(m21);
            let p = m.params();
            let reduced = p.r1 * (p.m21 - p.r1 * p.a) / p.m21;
            assert!((e2_growth_eigenvalue_unreduced(&m) - reduced).abs() < 1e-14);
        }
        let s = explicit_eigen_e2(&uni(2.0)).unwrap();
        assert!(s.values.iter().any(|v| v.re == 0.5 && v.im == 0.0));
        assert!(s.max_real_part > 0.0);
    }

    #[test]
    fn e2_requires_feasibility() {
        let p = fixtures::unidirectional_reference().with("A", 5.0).unwrap();
        let m = validate(p, Variant::Unidirectional).unwrap();
        assert_eq!(explicit_eigen_e2(&m), Err(Error::InfeasibleEquilibrium));
    }
}
