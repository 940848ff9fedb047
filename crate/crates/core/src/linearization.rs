//! Jacobian of the system, its finite-difference counterpart, and the
//! spectrum of 4x4 real matrices.

use nalgebra::linalg::Schur;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Model, State, Variant};
use crate::poly;

pub type Matrix4 = nalgebra::Matrix4<f64>;

/// Accuracy contract for reported eigenvalues.
pub const EIGEN_RESIDUAL_LIMIT: f64 = 1e-8;

/// Default central-difference step (scaled by `1 + |x_j|`).
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Derivative coefficients of the saturating fluxes.
///
/// `eta*` belong to the `m21` corridor (out of patch 1), `theta*` to `m12`,
/// `rho*` to `n21` and `sigma*` to `n12`. The `*1` coefficient is
/// `rate / D` and the `*2` coefficient `rate / D^2`, with `D` the corridor
/// denominator of the source patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationCoefficients {
    pub eta1: f64,
    pub eta2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

pub fn saturation_coefficients(state: &State, model: &Model) -> Result<SaturationCoefficients> {
    state.check_nonnegative()?;
    Ok(coefficients_unchecked(&state.to_array(), model))
}

pub(crate) fn coefficients_unchecked(x: &[f64; 4], model: &Model) -> SaturationCoefficients {
    let p = model.params();
    let (d1, d2) = model.sus_denominators(x);
    let (rho1, rho2, sigma1, sigma2) = if model.variant().allows_infected_migration() {
        let (e1, e2) = model.inf_denominators(x);
        (p.n21 / e1, p.n21 / (e1 * e1), p.n12 / e2, p.n12 / (e2 * e2))
    } else {
        (0.0, 0.0, 0.0, 0.0)
    };
    SaturationCoefficients {
        eta1: p.m21 / d1,
        eta2: p.m21 / (d1 * d1),
        theta1: p.m12 / d2,
        theta2: p.m12 / (d2 * d2),
        rho1,
        rho2,
        sigma1,
        sigma2,
    }
}

pub fn jacobian_analytic(state: &State, model: &Model) -> Result<Matrix4> {
    state.check_nonnegative()?;
    Ok(jacobian_unchecked(&state.to_array(), model))
}

/// Jacobian without state checks; used inside Newton iterations, which may
/// probe slightly outside the orthant.
pub(crate) fn jacobian_unchecked(x: &[f64; 4], model: &Model) -> Matrix4 {
    let p = model.params();
    let c = coefficients_unchecked(x, model);
    let [s1, i1, s2, i2] = *x;
    // d(m S/D)/dI is -m S/D^2 when I congests the corridor, zero otherwise
    let congest = match model.variant() {
        Variant::NoInfectedMigration => 0.0,
        _ => 1.0,
    };
    let out1_ds = c.eta1 - c.eta2 * s1;
    let out1_di = -congest * c.eta2 * s1;
    let in1_ds = c.theta1 - c.theta2 * s2;
    let in1_di = -congest * c.theta2 * s2;
    let iout1_ds = -c.rho2 * i1;
    let iout1_di = c.rho1 - c.rho2 * i1;
    let iin1_ds = -c.sigma2 * i2;
    let iin1_di = c.sigma1 - c.sigma2 * i2;

    Matrix4::new(
        p.r1 - p.gamma1 * i1 - out1_ds,
        -p.gamma1 * s1 + p.delta1 - out1_di,
        in1_ds,
        in1_di,
        //
        p.gamma1 * i1 - iout1_ds,
        p.gamma1 * s1 - p.delta1 - p.mu1 - iout1_di,
        iin1_ds,
        iin1_di,
        //
        out1_ds,
        out1_di,
        p.r2 - p.gamma2 * i2 - in1_ds,
        -p.gamma2 * s2 + p.delta2 - in1_di,
        //
        iout1_ds,
        iout1_di,
        p.gamma2 * i2 - iin1_ds,
        p.gamma2 * s2 - p.delta2 - p.mu2 - iin1_di,
    )
}

/// Central-difference Jacobian with per-component step `step * (1 + |x_j|)`.
pub fn jacobian_fd(state: &State, model: &Model, step: f64) -> Result<Matrix4> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidStep(step));
    }
    state.check_finite()?;
    let x = state.to_array();
    let mut jac = Matrix4::zeros();
    for j in 0..4 {
        let h = step * (1.0 + x[j].abs());
        let (mut xp, mut xm) = (x, x);
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (model.rhs_array(&xp), model.rhs_array(&xm));
        for i in 0..4 {
            jac[(i, j)] = (fp[i] - fm[i]) / (xp[j] - xm[j]);
        }
    }
    if jac.iter().all(|v| v.is_finite()) {
        Ok(jac)
    } else {
        Err(Error::NonFiniteResult)
    }
}

/// Coefficients `[1, c3, c2, c1, c0]` of `det(lambda I - m)`, from traces of
/// principal minors.
pub fn characteristic_poly(m: &Matrix4) -> [f64; 5] {
    let mut minors2 = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            minors2 += m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)];
        }
    }
    let mut minors3 = 0.0;
    for skip in 0..4 {
        let idx: Vec<usize> = (0..4).filter(|&k| k != skip).collect();
        minors3 += det3(m, [idx[0], idx[1], idx[2]]);
    }
    [1.0, -m.trace(), minors2, -minors3, m.determinant()]
}

/// Determinant of the principal 3x3 submatrix on `idx`.
pub fn det3(m: &Matrix4, idx: [usize; 3]) -> f64 {
    let a = |r: usize, c: usize| m[(idx[r], idx[c])];
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

/// Coefficients `[1, p2, p1, p0]` of the characteristic polynomial of the
/// principal 3x3 submatrix on `idx`.
pub fn characteristic_poly3(m: &Matrix4, idx: [usize; 3]) -> [f64; 4] {
    let trace: f64 = idx.iter().map(|&i| m[(i, i)]).sum();
    let mut minors2 = 0.0;
    for a in 0..3 {
        for b in (a + 1)..3 {
            let (i, j) = (idx[a], idx[b]);
            minors2 += m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)];
        }
    }
    [1.0, -trace, minors2, -det3(m, idx)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenSpectrum {
    /// Sorted by decreasing real part, then decreasing imaginary part.
    pub values: [Complex64; 4],
    pub max_real_part: f64,
    pub has_complex_pair: bool,
}

impl EigenSpectrum {
    pub fn from_values(mut values: [Complex64; 4]) -> Self {
        values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        let max_real_part = values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
        let has_complex_pair = values.iter().any(|v| v.im != 0.0);
        Self {
            values,
            max_real_part,
            has_complex_pair,
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest real part among non-real eigenvalues, if any.
    pub fn max_complex_real_part(&self) -> Option<f64> {
        self.values
            .iter()
            .filter(|v| v.im != 0.0)
            .map(|v| v.re)
            .reduce(f64::max)
    }

    /// Distance from `z` to the nearest eigenvalue.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.values.iter().map(|v| (v - z).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Whether `other` matches this spectrum as a multiset within `tol`.
    pub fn matches(&self, other: &[Complex64], tol: f64) -> bool {
        if other.len() != 4 {
            return false;
        }
        let mut used = [false; 4];
        other.iter().all(|z| {
            let best = (0..4)
                .filter(|&k| !used[k])
                .min_by(|&a, &b| (self.values[a] - z).norm().total_cmp(&(self.values[b] - z).norm()));
            match best {
                Some(k) if (self.values[k] - z).norm() <= tol * (1.0 + z.norm()) => {
                    used[k] = true;
                    true
                }
                _ => false,
            }
        })
    }
}

/// Eigenvalues via real Schur form, each checked against the characteristic
/// polynomial.
pub fn eigenvalues(m: &Matrix4) -> Result<EigenSpectrum> {
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteResult);
    }
    let schur = Schur::try_new(*m, f64::EPSILON, 500).ok_or(Error::ConvergenceFailure)?;
    let raw = schur.complex_eigenvalues();
    let mut values = [Complex64::new(0.0, 0.0); 4];
    for (slot, v) in values.iter_mut().zip(raw.iter()) {
        *slot = *v;
    }
    enforce_conjugate_pairs(&mut values);
    let coeffs = characteristic_poly(m);
    if values
        .iter()
        .any(|z| poly::relative_residual(&coeffs, *z) > EIGEN_RESIDUAL_LIMIT)
    {
        return Err(Error::ConvergenceFailure);
    }
    Ok(EigenSpectrum::from_values(values))
}

fn enforce_conjugate_pairs(values: &mut [Complex64; 4]) {
    let mut paired = [false; 4];
    for i in 0..4 {
        if paired[i] || values[i].im == 0.0 {
            continue;
        }
        let partner = (0..4)
            .filter(|&j| j != i && !paired[j] && values[j].im * values[i].im < 0.0)
            .min_by(|&a, &b| {
                (values[a] - values[i].conj())
                    .norm()
                    .total_cmp(&(values[b] - values[i].conj()).norm())
            });
        if let Some(j) = partner {
            let re = 0.5 * (values[i].re + values[j].re);
            let im = 0.5 * (values[i].im.abs() + values[j].im.abs());
            let sign = values[i].im.signum();
            values[i] = Complex64::new(re, sign * im);
            values[j] = Complex64::new(re, -sign * im);
            paired[i] = true;
            paired[j] = true;
        } else {
            values[i].im = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::validate;

    fn general() -> Model {
        validate(fixtures::general_reference(), Variant::General).unwrap()
    }

    fn max_rel_error(a: &Matrix4, b: &Matrix4) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs() / (1.0 + y.abs()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn coefficients_at_origin() {
        let c = saturation_coefficients(&State::default(), &general()).unwrap();
        assert_eq!(c.eta1, 1.0);
        assert_eq!(c.eta2, 1.0);
        assert_eq!(c.rho1, 0.1);
        assert!((c.rho2 - 0.01).abs() < 1e-18);
    }

    #[test]
    fn coefficients_at_susceptible_state() {
        let c = saturation_coefficients(&State::new(1.0, 0.0, 1.0, 0.0), &general()).unwrap();
        assert_eq!(c.eta1, 0.5);
        assert_eq!(c.eta2, 0.25);
    }

    #[test]
    fn no_infected_migration_has_no_infected_coefficients() {
        let m = validate(fixtures::z1_reference(), Variant::NoInfectedMigration).unwrap();
        let c = saturation_coefficients(&State::new(2.0, 3.0, 1.0, 4.0), &m).unwrap();
        assert_eq!([c.rho1, c.rho2, c.sigma1, c.sigma2], [0.0; 4]);
        assert_eq!(c.eta1, 2.0 / 7.0);
    }

    #[test]
    fn negative_state_rejected() {
        let s = State::new(0.0, -1.0, 0.0, 0.0);
        assert!(matches!(
            jacobian_analytic(&s, &general()),
            Err(Error::NegativeState { component: "I1", .. })
        ));
        assert!(saturation_coefficients(&s, &general()).is_err());
    }

    #[test]
    fn origin_entries() {
        let j = jacobian_analytic(&State::default(), &general()).unwrap();
        assert_eq!(j[(0, 0)], 0.0);
        assert!((j[(1, 1)] + 1.6).abs() < 1e-15);
    }

    #[test]
    fn fd_matches_analytic_at_origin() {
        let m = general();
        let s = State::default();
        let a = jacobian_analytic(&s, &m).unwrap();
        let f = jacobian_fd(&s, &m, 1e-6).unwrap();
        assert!(max_rel_error(&f, &a) < 1e-8);
    }

    #[test]
    fn fd_matches_analytic_at_no_migrate_coexistence() {
        let m = validate(fixtures::no_migrate_coexistence(), Variant::NoInfectedMigration).unwrap();
        let s = State::splat(1.5);
        let a = jacobian_analytic(&s, &m).unwrap();
        let f = jacobian_fd(&s, &m, DEFAULT_FD_STEP).unwrap();
        assert!(max_rel_error(&f, &a) < 1e-6);
    }

    #[test]
    fn fd_error_is_second_order() {
        // large A keeps the corridors nearly linear, so the error is smooth in the step
        let p = fixtures::general_reference().with("A", 50.0).unwrap();
        let m = validate(p, Variant::General).unwrap();
        let s = State::new(1.2, 0.7, 2.0, 0.4);
        let exact = jacobian_analytic(&s, &m).unwrap();
        let err = |h: f64| {
            let f = jacobian_fd(&s, &m, h).unwrap();
            (f - exact).abs().max()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn invalid_step_rejected() {
        let m = general();
        assert_eq!(jacobian_fd(&State::default(), &m, 0.0), Err(Error::InvalidStep(0.0)));
    }

    #[test]
    fn unidirectional_upper_right_block_vanishes() {
        let m = validate(fixtures::unidirectional_reference(), Variant::Unidirectional).unwrap();
        let j = jacobian_analytic(&State::new(0.8, 1.1, 2.3, 0.6), &m).unwrap();
        for (r, c) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            assert_eq!(j[(r, c)], 0.0);
        }
    }

    #[test]
    fn diagonal_spectrum() {
        let m = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.5, -1.0, -1.6));
        let s = eigenvalues(&m).unwrap();
        let re: Vec<f64> = s.values.iter().map(|v| v.re).collect();
        assert_eq!(re, vec![1.0, -1.0, -1.5, -1.6]);
        assert!(!s.has_complex_pair);
        assert_eq!(s.max_real_part, 1.0);
    }

    #[test]
    fn origin_spectrum_is_h_times_k() {
        let j = jacobian_analytic(&State::default(), &general()).unwrap();
        let s = eigenvalues(&j).unwrap();
        let mut expected = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        expected.extend(poly::monic_quadratic_roots(3.2, 2.55));
        assert!(s.matches(&expected, 1e-10), "{:?}", s.values);
    }

    #[test]
    fn rotation_block() {
        let mut m = Matrix4::zeros();
        m[(0, 1)] = -1.0;
        m[(1, 0)] = 1.0;
        m[(2, 2)] = -2.0;
        m[(3, 3)] = -3.0;
        let s = eigenvalues(&m).unwrap();
        assert!(s.has_complex_pair);
        assert_eq!(s.values[0], Complex64::new(0.0, 1.0));
        assert_eq!(s.values[1], Complex64::new(0.0, -1.0));
    }

    #[test]
    fn identity_characteristic_poly() {
        assert_eq!(characteristic_poly(&Matrix4::identity()), [1.0, -4.0, 6.0, -4.0, 1.0]);
    }

    #[test]
    fn origin_characteristic_poly_factors() {
        let j = jacobian_analytic(&State::default(), &general()).unwrap();
        let c = characteristic_poly(&j);
        let hk = poly::multiply(&[1.0, 0.0, -1.0], &[1.0, 3.2, 2.55]);
        for (a, b) in c.iter().zip(&hk) {
            assert!((a - b).abs() < 1e-12, "{c:?} vs {hk:?}");
        }
    }

    #[test]
    fn non_finite_matrix_rejected() {
        let mut m = Matrix4::identity();
        m[(2, 1)] = f64::NAN;
        assert!(eigenvalues(&m).is_err());
    }
}
