//! Stability of equilibria.
//!
//! The verdict always comes from the Jacobian spectrum. Wherever a closed
//! criterion exists for an equilibrium it is evaluated on its own and
//! compared with that verdict.

mod explicit;
mod indicators;
mod origin;
mod scan;

use num_complex::Complex64;
use serde::Serialize;

pub use explicit::{e2_growth_eigenvalue_unreduced, explicit_eigen_e1, explicit_eigen_e2};
pub use indicators::{
    coex_indicators_unidirectional, disease_free_cubic, hopf_conditions, hopf_conditions_raw, routh_hurwitz_cubic,
    CoexIndicators, DiseaseFreeCubic, DiseaseFreePatch, HopfFlag, TranscriptionCheck, HOPF_EQUALITY_TOL,
    TRANSCRIPTION_TOL,
};
pub use origin::{origin_factorization, origin_hopf_excluded, psi, OriginFactorization, PsiCheck};
pub use scan::{hopf_scan, Channel, Crossing, HopfScan, ScanPath, ScanPoint};

use crate::equilibria::{Equilibrium, EquilibriumId, InequalityCheck, Relation, RESIDUAL_LIMIT};
use crate::error::{Error, Result};
use crate::linearization::{eigenvalues, jacobian_unchecked, EigenSpectrum};
use crate::model::{Model, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

/// Width of the marginal band around the imaginary axis.
pub fn marginal_epsilon(spectrum: &EigenSpectrum) -> f64 {
    1e-9 * (1.0 + spectrum.spectral_radius())
}

pub fn verdict_of(spectrum: &EigenSpectrum) -> Verdict {
    let eps = marginal_epsilon(spectrum);
    if spectrum.max_real_part < -eps {
        Verdict::Stable
    } else if spectrum.max_real_part.abs() <= eps {
        Verdict::Marginal
    } else {
        Verdict::Unstable
    }
}

/// A closed stability criterion evaluated at one equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticCriterion {
    pub name: String,
    /// True iff every check holds.
    pub stable: bool,
    pub checks: Vec<InequalityCheck>,
}

impl AnalyticCriterion {
    fn new(name: impl Into<String>, checks: Vec<InequalityCheck>) -> Self {
        let stable = checks.iter().all(|c| c.holds);
        Self {
            name: name.into(),
            stable,
            checks,
        }
    }
}

/// An eigenvalue known in closed form, looked up in the computed spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplicitEigenvalue {
    pub name: String,
    pub value: Complex64,
    pub present: bool,
}

impl ExplicitEigenvalue {
    fn new(name: impl Into<String>, value: Complex64, spectrum: &EigenSpectrum) -> Self {
        let present = spectrum.distance_to(value) <= 1e-8 * (1.0 + value.norm());
        Self {
            name: name.into(),
            value,
            present,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub identity: EquilibriumId,
    pub spectrum: EigenSpectrum,
    pub verdict: Verdict,
    pub epsilon: f64,
    pub analytic_checks: Vec<AnalyticCriterion>,
    /// Verdict of the closed criterion, if this equilibrium has one.
    pub criterion_verdict: Option<bool>,
    /// Criterion and spectrum agree (always true without a criterion, and
    /// within the marginal band).
    pub agreement: bool,
    pub explicit_eigenvalues: Vec<ExplicitEigenvalue>,
    pub transcription: Vec<TranscriptionCheck>,
    pub notes: Vec<String>,
}

impl StabilityReport {
    /// Every closed-form eigenvalue was found in the spectrum.
    pub fn explicit_eigenvalues_present(&self) -> bool {
        self.explicit_eigenvalues.iter().all(|e| e.present)
    }

    pub fn transcription_mismatches(&self) -> impl Iterator<Item = &TranscriptionCheck> {
        self.transcription.iter().filter(|t| !t.matches)
    }
}

fn lt(name: &str, lhs: f64, rhs: f64) -> InequalityCheck {
    InequalityCheck::new(name, lhs, Relation::Lt, rhs)
}

fn gt(name: &str, lhs: f64, rhs: f64) -> InequalityCheck {
    InequalityCheck::new(name, lhs, Relation::Gt, rhs)
}

#[derive(Default)]
struct Findings {
    criterion: Option<AnalyticCriterion>,
    explicit: Vec<ExplicitEigenvalue>,
    transcription: Vec<TranscriptionCheck>,
    notes: Vec<String>,
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn classify(eq: &Equilibrium, model: &Model) -> Result<StabilityReport> {
    // negated so a NaN residual is rejected too
    if !(eq.residual < RESIDUAL_LIMIT) {
        return Err(Error::ResidualTooLarge {
            residual: eq.residual,
            limit: RESIDUAL_LIMIT,
        });
    }
    let x = eq.point.to_array();
    let jac = jacobian_unchecked(&x, model);
    let spectrum = eigenvalues(&jac)?;
    let verdict = verdict_of(&spectrum);
    let epsilon = marginal_epsilon(&spectrum);

    let findings = match (eq.identity, model.variant()) {
        (EquilibriumId::Origin, _) => origin_findings(model, &spectrum),
        (EquilibriumId::E1, Variant::Unidirectional) => e1_findings(model, &spectrum)?,
        (EquilibriumId::E2, Variant::Unidirectional) => e2_findings(model, &spectrum),
        (EquilibriumId::CoexistenceNumeric, Variant::Unidirectional) => {
            coexistence_findings(&x, &jac, model, &spectrum)
        }
        (EquilibriumId::Z1Plus | EquilibriumId::Z1Minus, Variant::NoInfectedMigration) => {
            z_findings(&x, model, DiseaseFreePatch::Two, &spectrum)
        }
        (EquilibriumId::Z2Plus | EquilibriumId::Z2Minus, Variant::NoInfectedMigration) => {
            z_findings(&x, model, DiseaseFreePatch::One, &spectrum)
        }
        _ => Findings {
            notes: vec!["no closed criterion for this equilibrium; spectrum only".into()],
            ..Findings::default()
        },
    };

    let criterion_verdict = findings.criterion.as_ref().map(|c| c.stable);
    let agreement = match (criterion_verdict, verdict) {
        (None, _) | (_, Verdict::Marginal) => true,
        (Some(c), Verdict::Stable) => c,
        (Some(c), Verdict::Unstable) => !c,
    };
    Ok(StabilityReport {
        identity: eq.identity,
        spectrum,
        verdict,
        epsilon,
        analytic_checks: findings.criterion.into_iter().collect(),
        criterion_verdict,
        agreement,
        explicit_eigenvalues: findings.explicit,
        transcription: findings.transcription,
        notes: findings.notes,
    })
}

fn origin_findings(model: &Model, spectrum: &EigenSpectrum) -> Findings {
    let f = origin_factorization(model);
    let mut checks = vec![
        gt("m12/A + m21/A - r1 - r2 > 0", f.h[1], 0.0),
        gt("r1*r2 - m12*r1/A - m21*r2/A > 0", f.h[2], 0.0),
    ];
    let mut explicit = Vec::new();
    match f.explicit_eigenvalues {
        Some([l1, l2]) => {
            checks.push(lt("-delta1 - mu1 < 0", l1, 0.0));
            checks.push(lt("-delta2 - mu2 < 0", l2, 0.0));
        }
        None => {
            checks.push(gt("k1 > 0", f.k[1], 0.0));
            checks.push(gt("k0 > 0", f.k[2], 0.0));
        }
    }
    for (n, z) in f.roots().into_iter().enumerate() {
        let label = if n < 2 { "H" } else { "K" };
        explicit.push(ExplicitEigenvalue::new(
            format!("{label} root {}", n % 2 + 1),
            z,
            spectrum,
        ));
    }
    Findings {
        criterion: Some(AnalyticCriterion::new(
            "origin: H Routh-Hurwitz and K positivity",
            checks,
        )),
        explicit,
        ..Findings::default()
    }
}

fn e1_findings(model: &Model, spectrum: &EigenSpectrum) -> Result<Findings> {
    let p = model.params();
    let printed = explicit_eigen_e1(model)?;
    let pair = e1_pair_max_real_part(model);
    let checks = vec![
        lt("r1*A < m21", p.r1 * p.a, p.m21),
        lt("Re lambda1,2 < 0", pair, 0.0),
        lt("-(delta1 + mu1) - n21/B < 0", -(p.delta1 + p.mu1) - p.n21 / p.b, 0.0),
    ];
    let explicit = printed
        .values
        .iter()
        .enumerate()
        .map(|(n, &z)| ExplicitEigenvalue::new(format!("E1 lambda {}", n + 1), z, spectrum))
        .collect();
    Ok(Findings {
        criterion: Some(AnalyticCriterion::new("E1: r1*A < m21", checks)),
        explicit,
        ..Findings::default()
    })
}

/// Largest real part among the roots of the patch-2 quadratic at `E1`.
fn e1_pair_max_real_part(model: &Model) -> f64 {
    let p = model.params();
    let b = p.r2 * p.delta2;
    let disc = b * b - 4.0 * p.mu2 * p.mu2 * p.r2 * (p.mu2 + p.delta2);
    (-b + disc.max(0.0).sqrt()) / (2.0 * p.mu2)
}

fn e2_findings(model: &Model, spectrum: &EigenSpectrum) -> Findings {
    let p = model.params();
    let Ok(printed) = explicit_eigen_e2(model) else {
        return Findings {
            notes: vec!["E2 infeasible; no closed criterion evaluated".into()],
            ..Findings::default()
        };
    };
    let s1 = (p.m21 - p.r1 * p.a) / p.r1;
    let l1 = p.gamma1 * s1 - p.delta1 - p.mu1 - p.n21 / (p.b + s1);
    let l2 = p.r1 * (p.m21 - p.r1 * p.a) / p.m21;
    let pair = printed
        .values
        .iter()
        .filter(|z| z.re != l1 || z.im != 0.0)
        .filter(|z| z.re != l2 || z.im != 0.0)
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![
        lt("gamma1*S1 - delta1 - mu1 - n21/(B+S1) < 0", l1, 0.0),
        lt("r1*(m21 - r1*A)/m21 < 0", l2, 0.0),
        lt("Re lambda3,4 < 0", pair, 0.0),
    ];
    let explicit = printed
        .values
        .iter()
        .enumerate()
        .map(|(n, &z)| ExplicitEigenvalue::new(format!("E2 lambda {}", n + 1), z, spectrum))
        .collect();
    let mut notes = Vec::new();
    if l2 == 0.0 {
        notes.push("E2 coincides with E1 (m21 = r1*A)".into());
    }
    Findings {
        criterion: Some(AnalyticCriterion::new("E2: explicit eigenvalues negative", checks)),
        explicit,
        notes,
        ..Findings::default()
    }
}

fn coexistence_findings(
    x: &[f64; 4],
    jac: &crate::linearization::Matrix4,
    model: &Model,
    spectrum: &EigenSpectrum,
) -> Findings {
    let p = model.params();
    let ind = indicators::indicators_from_jacobian(x, jac, model);
    let [_, _, s2, i2] = *x;
    let checks = vec![
        gt("a1 > 0", ind.a1, 0.0),
        gt("a0 > 0", ind.a0, 0.0),
        lt(
            "gamma2*S2 + r2 < gamma2*I2 + delta2 + mu2",
            p.gamma2 * s2 + p.r2,
            p.gamma2 * i2 + p.delta2 + p.mu2,
        ),
        lt(
            "r2*delta2 + r2*mu2 < r2*gamma2*S2 + mu2*gamma2*I2",
            p.r2 * p.delta2 + p.r2 * p.mu2,
            p.r2 * p.gamma2 * s2 + p.mu2 * p.gamma2 * i2,
        ),
    ];
    let explicit = ind
        .lambda34
        .iter()
        .enumerate()
        .map(|(n, &z)| ExplicitEigenvalue::new(format!("(k +/- sqrt(k^2 + 4h))/2 root {}", n + 1), z, spectrum))
        .collect();
    let mut notes = vec!["h taken as r2*delta2 + r2*mu2 - r2*gamma2*S2 - mu2*gamma2*I2".to_string()];
    if !ind.reconstruction_consistent {
        notes.push(format!(
            "lambda3,4 reconstruction off by {:e}",
            ind.reconstruction_error
        ));
    }
    Findings {
        criterion: Some(AnalyticCriterion::new("coexistence: a1, a0, k, h signs", checks)),
        explicit,
        transcription: ind.transcription,
        notes,
    }
}

fn z_findings(x: &[f64; 4], model: &Model, patch: DiseaseFreePatch, spectrum: &EigenSpectrum) -> Findings {
    let p = model.params();
    let cubic = disease_free_cubic(x, model, patch);
    let [c2, c1, c0] = cubic.coefficients;
    let (explicit_check, label, name) = match patch {
        DiseaseFreePatch::Two => (
            lt("gamma2*S2 < delta2 + mu2", p.gamma2 * x[2], p.delta2 + p.mu2),
            "p",
            "gamma2*S2 - delta2 - mu2",
        ),
        DiseaseFreePatch::One => (
            lt("gamma1*S1 < delta1 + mu1", p.gamma1 * x[0], p.delta1 + p.mu1),
            "q",
            "gamma1*S1 - delta1 - mu1",
        ),
    };
    let checks = vec![
        explicit_check,
        gt(&format!("{label}0 > 0"), c0, 0.0),
        gt(&format!("{label}2 > 0"), c2, 0.0),
        gt(&format!("{label}2*{label}1 > {label}0"), c2 * c1, c0),
    ];
    debug_assert_eq!(checks[1..].iter().all(|c| c.holds), routh_hurwitz_cubic(c2, c1, c0));
    Findings {
        criterion: Some(AnalyticCriterion::new(
            format!("explicit eigenvalue and Routh-Hurwitz on {label}"),
            checks,
        )),
        explicit: vec![ExplicitEigenvalue::new(
            name,
            Complex64::new(cubic.explicit_eigenvalue, 0.0),
            spectrum,
        )],
        transcription: cubic.transcription,
        notes: Vec::new(),
    }
}
