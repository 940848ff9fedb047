//! Equilibrium catalog: closed forms per variant with their feasibility
//! inequalities, plus a damped Newton search for points without a closed form.

mod conditions;
mod newton;

pub use conditions::{general_coexistence_conditions, ConditionReport, IntervalPairing};
pub use newton::{
    default_seed_grid, newton_polish, seed_grid, solve_coexistence_numeric, NewtonOptions, NumericSearch, SeedFailure,
    DEFAULT_SEED_VALUES,
};

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Model, ParameterSet, State, Variant};

/// Residual bound every emitted equilibrium satisfies.
pub const RESIDUAL_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EquilibriumId {
    Origin,
    /// Unidirectional: patch 1 empty, patch 2 endemic.
    E1,
    /// Unidirectional: patch 1 disease-free, patch 2 endemic.
    E2,
    /// No infected migration: patch 2 disease-free, larger `S2` root.
    Z1Plus,
    Z1Minus,
    /// No infected migration: patch 1 disease-free, larger `S1` root.
    Z2Plus,
    Z2Minus,
    CoexistenceClosedForm,
    /// Newton root with every component positive.
    CoexistenceNumeric,
    /// Newton root on the boundary of the orthant (some component zero).
    BoundaryNumeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    ClosedForm,
    NewtonSolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub point: State,
    pub identity: EquilibriumId,
    pub feasible: bool,
    pub provenance: Provenance,
    /// Max-norm of the right-hand side at `point`.
    pub residual: f64,
}

impl Equilibrium {
    pub(crate) fn new(
        point: State,
        identity: EquilibriumId,
        provenance: Provenance,
        feasible: bool,
        model: &Model,
    ) -> Self {
        let residual = residual(&point, model);
        let nonnegative = point.to_array().iter().all(|&v| v >= 0.0);
        Self {
            point,
            identity,
            feasible: feasible && nonnegative,
            provenance,
            residual,
        }
    }
}

pub fn residual(point: &State, model: &Model) -> f64 {
    let f = model.rhs_array(&point.to_array());
    f.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Ordering used for result lists: identity, then lexicographic point order.
pub(crate) fn catalog_order(a: &Equilibrium, b: &Equilibrium) -> Ordering {
    a.identity.cmp(&b.identity).then_with(|| {
        a.point
            .to_array()
            .iter()
            .zip(b.point.to_array())
            .map(|(x, y)| x.total_cmp(&y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

/// One evaluated inequality `lhs <relation> rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    pub fn new(name: impl Into<String>, lhs: f64, relation: Relation, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            relation,
            rhs,
            holds: relation.holds(lhs, rhs),
        }
    }

    /// Re-derives the verdict from the recorded sides.
    pub fn recompute(&self) -> bool {
        self.relation.holds(self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub checks: Vec<InequalityCheck>,
    /// Linear coefficient of the disease-free-patch-2 quadratic.
    pub ell: Option<f64>,
    /// Linear coefficient of the disease-free-patch-1 quadratic.
    pub h: Option<f64>,
    pub discriminant: Option<f64>,
    /// Set when the point duplicates another catalog entry.
    pub coincides_with: Option<EquilibriumId>,
    pub notes: Vec<String>,
}

impl FeasibilityReport {
    fn always(note: &str) -> Self {
        Self {
            feasible: true,
            notes: vec![note.to_string()],
            ..Default::default()
        }
    }

    fn from_checks(checks: Vec<InequalityCheck>) -> Self {
        Self {
            feasible: checks.iter().all(|c| c.holds),
            checks,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub equilibrium: Equilibrium,
    pub feasibility: FeasibilityReport,
}

/// A `Z1`/`Z2` pair whose quadratic has no real roots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexBranch {
    pub pair: &'static str,
    pub discriminant: f64,
    pub feasibility: FeasibilityReport,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
    pub complex_branches: Vec<ComplexBranch>,
    pub notes: Vec<String>,
}

impl Catalog {
    pub fn get(&self, id: EquilibriumId) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.equilibrium.identity == id)
    }

    fn push(&mut self, point: State, id: EquilibriumId, feasibility: FeasibilityReport, model: &Model) {
        let eq = Equilibrium::new(point, id, Provenance::ClosedForm, feasibility.feasible, model);
        if eq.residual.is_finite() {
            self.entries.push(CatalogEntry {
                equilibrium: eq,
                feasibility,
            });
        } else {
            self.notes
                .push(format!("{id:?} omitted: right-hand side undefined at {point:?}"));
        }
    }
}

fn require(model: &Model, expected: Variant) -> Result<()> {
    if model.variant() == expected {
        Ok(())
    } else {
        Err(Error::WrongVariant {
            expected,
            actual: model.variant(),
        })
    }
}

/// Every equilibrium with a closed form in the model's variant, feasible or not.
pub fn closed_form_equilibria(model: &Model) -> Catalog {
    let mut catalog = Catalog::default();
    catalog.push(
        State::default(),
        EquilibriumId::Origin,
        FeasibilityReport::always("the origin is always an equilibrium"),
        model,
    );
    let p = model.params();
    match model.variant() {
        Variant::General => {
            catalog
                .notes
                .push("coexistence has no closed form; use the numeric search".to_string());
        }
        Variant::Unidirectional => {
            catalog.push(
                e1_point(p),
                EquilibriumId::E1,
                FeasibilityReport::always("E1 is always feasible"),
                model,
            );
            if p.m21 > 0.0 {
                catalog.push(e2_point(p), EquilibriumId::E2, e2_report(p), model);
            } else {
                catalog
                    .notes
                    .push("E2 omitted: m21 = 0 makes its corridor denominator vanish".to_string());
            }
        }
        Variant::NoInfectedMigration => {
            push_pair(&mut catalog, model, Patch::Two);
            push_pair(&mut catalog, model, Patch::One);
            let (point, report) = coexistence_point(p);
            catalog.push(point, EquilibriumId::CoexistenceClosedForm, report, model);
        }
    }
    catalog
}

fn e1_point(p: &ParameterSet) -> State {
    let s2 = (p.delta2 + p.mu2) / p.gamma2;
    let i2 = p.r2 * (p.delta2 + p.mu2) / (p.gamma2 * p.mu2);
    State::new(0.0, 0.0, s2, i2)
}

fn e2_point(p: &ParameterSet) -> State {
    let excess = p.m21 - p.r1 * p.a;
    let s1 = excess / p.r1;
    let s2 = (p.delta2 + p.mu2) / p.gamma2;
    let i2 = (p.gamma2 * excess + p.r2 * (p.delta2 + p.mu2)) / (p.gamma2 * p.mu2);
    State::new(s1, 0.0, s2, i2)
}

fn e2_report(p: &ParameterSet) -> FeasibilityReport {
    let mut report = FeasibilityReport::from_checks(vec![InequalityCheck::new(
        "m21 >= r1*A",
        p.m21,
        Relation::Ge,
        p.r1 * p.a,
    )]);
    if p.m21 == p.r1 * p.a {
        report.coincides_with = Some(EquilibriumId::E1);
        report
            .notes
            .push("m21 = r1*A: S1 = 0 and E2 coincides with E1".to_string());
    }
    report
}

/// Feasibility of the unidirectional point with patch 1 disease-free.
pub fn feasibility_e2(model: &Model) -> Result<FeasibilityReport> {
    require(model, Variant::Unidirectional)?;
    Ok(e2_report(model.params()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Patch {
    One,
    Two,
}

/// Quadratic data for the pair whose `disease_free` patch carries no infected.
struct PairData {
    /// Susceptibles of the endemic patch.
    s_endemic: f64,
    linear: f64,
    discriminant: f64,
    denom: f64,
    report: FeasibilityReport,
}

fn pair_data(p: &ParameterSet, disease_free: Patch) -> PairData {
    let a = p.a;
    match disease_free {
        Patch::Two => {
            let s1 = (p.delta1 + p.mu1) / p.gamma1;
            let ell = p.m12 * a + p.m12 * s1 - p.r2 * a * a - p.r2 * a * s1 - p.m21 * s1;
            let discriminant = ell * ell - 4.0 * p.r2 * p.m21 * a * s1 * (a + s1);
            let mut report = FeasibilityReport::from_checks(vec![
                InequalityCheck::new(
                    "m21*S1 + r2*A^2 + r2*A*S1 < m12*A + m12*S1",
                    p.m21 * s1 + p.r2 * a * a + p.r2 * a * s1,
                    Relation::Lt,
                    p.m12 * a + p.m12 * s1,
                ),
                InequalityCheck::new("ell^2 - 4*r2*m21*A*S1*(A+S1) >= 0", discriminant, Relation::Ge, 0.0),
            ]);
            report.ell = Some(ell);
            report.discriminant = Some(discriminant);
            PairData {
                s_endemic: s1,
                linear: ell,
                discriminant,
                denom: 2.0 * p.r2 * (a + s1),
                report,
            }
        }
        Patch::One => {
            let s2 = (p.delta2 + p.mu2) / p.gamma2;
            let h = p.m21 * a + p.m21 * s2 - p.m12 * s2 - p.r1 * a * a - p.r1 * a * s2;
            let discriminant = h * h - 4.0 * p.r1 * p.m12 * a * s2 * (a + s2);
            let mut report = FeasibilityReport::from_checks(vec![
                InequalityCheck::new(
                    "m12*S2 + r1*A^2 + r1*A*S2 < m21*A + m21*S2",
                    p.m12 * s2 + p.r1 * a * a + p.r1 * a * s2,
                    Relation::Lt,
                    p.m21 * a + p.m21 * s2,
                ),
                InequalityCheck::new("h^2 - 4*r1*m12*A*S2*(A+S2) >= 0", discriminant, Relation::Ge, 0.0),
            ]);
            report.h = Some(h);
            report.discriminant = Some(discriminant);
            PairData {
                s_endemic: s2,
                linear: h,
                discriminant,
                denom: 2.0 * p.r1 * (a + s2),
                report,
            }
        }
    }
}

/// Feasibility of the `Z1` pair (patch 2 disease-free).
pub fn feasibility_z1(model: &Model) -> Result<FeasibilityReport> {
    require(model, Variant::NoInfectedMigration)?;
    Ok(pair_data(model.params(), Patch::Two).report)
}

/// Feasibility of the `Z2` pair (patch 1 disease-free).
pub fn feasibility_z2(model: &Model) -> Result<FeasibilityReport> {
    require(model, Variant::NoInfectedMigration)?;
    Ok(pair_data(model.params(), Patch::One).report)
}

fn push_pair(catalog: &mut Catalog, model: &Model, disease_free: Patch) {
    let p = model.params();
    let data = pair_data(p, disease_free);
    let name = match disease_free {
        Patch::Two => "Z1",
        Patch::One => "Z2",
    };
    if data.discriminant < 0.0 {
        catalog.complex_branches.push(ComplexBranch {
            pair: name,
            discriminant: data.discriminant,
            feasibility: data.report,
        });
        return;
    }
    let sq = data.discriminant.sqrt();
    for (sign, id) in [(1.0, 0), (-1.0, 1)] {
        let root = (data.linear + sign * sq) / data.denom;
        let (point, identity) = match disease_free {
            Patch::Two => {
                let s1 = data.s_endemic;
                let i1 = s1 * p.r1 / p.mu1 + p.r2 * root / p.mu1;
                let id = [EquilibriumId::Z1Plus, EquilibriumId::Z1Minus][id];
                (State::new(s1, i1, root, 0.0), id)
            }
            Patch::One => {
                let s2 = data.s_endemic;
                let i2 = p.r2 * (p.delta2 + p.mu2) / (p.gamma2 * p.mu2) + p.r1 * root / p.mu2;
                let id = [EquilibriumId::Z2Plus, EquilibriumId::Z2Minus][id];
                (State::new(root, 0.0, s2, i2), id)
            }
        };
        catalog.push(point, identity, data.report.clone(), model);
    }
}

fn coexistence_point(p: &ParameterSet) -> (State, FeasibilityReport) {
    let a = p.a;
    let s1 = (p.delta1 + p.mu1) / p.gamma1;
    let s2 = (p.delta2 + p.mu2) / p.gamma2;
    let out = p.m21 * s1 / (a + s1);
    let inflow = p.m12 * s2 / (a + s2);
    // gamma1*S1 - delta1 reduces to mu1
    let i1 = (p.r1 * s1 - out + inflow) / (p.gamma1 * s1 - p.delta1);
    let i2 = (p.r1 * p.gamma2 * (p.delta1 + p.mu1) + p.r2 * p.gamma1 * (p.delta2 + p.mu2)
        - i1 * p.gamma1 * p.gamma2 * p.mu1)
        / (p.gamma1 * p.gamma2 * p.mu2);
    let i1_bound =
        (p.r1 * p.gamma2 * (p.delta1 + p.mu1) + p.r2 * p.gamma1 * (p.delta2 + p.mu2)) / (p.gamma1 * p.gamma2 * p.mu1);
    let checks = vec![
        InequalityCheck::new(
            "r1*S1 + m12*S2/(A+S2) >= m21*S1/(A+S1)",
            p.r1 * s1 + inflow,
            Relation::Ge,
            out,
        ),
        InequalityCheck::new(
            "r2*S2 + m21*S1/(A+S1) >= m12*S2/(A+S2)",
            p.r2 * s2 + out,
            Relation::Ge,
            inflow,
        ),
    ];
    let mut report = FeasibilityReport::from_checks(checks);
    // equivalent form of the second inequality, kept for cross-checking
    report.checks.push(InequalityCheck::new(
        "I1 <= (r1*gamma2*(delta1+mu1) + r2*gamma1*(delta2+mu2))/(gamma1*gamma2*mu1)",
        i1,
        Relation::Le,
        i1_bound,
    ));
    if i1 < 0.0 {
        report.notes.push(format!("negative I1 = {i1}"));
    }
    if i2 < 0.0 {
        report.notes.push(format!("negative I2 = {i2}"));
    }
    (State::new(s1, i1, s2, i2), report)
}

/// Endemic coexistence point of the no-infected-migration variant.
pub fn coexistence_closed_form_no_migrate(model: &Model) -> Result<CatalogEntry> {
    require(model, Variant::NoInfectedMigration)?;
    let (point, feasibility) = coexistence_point(model.params());
    Ok(CatalogEntry {
        equilibrium: Equilibrium::new(
            point,
            EquilibriumId::CoexistenceClosedForm,
            Provenance::ClosedForm,
            feasibility.feasible,
            model,
        ),
        feasibility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::validate;

    fn uni(m21: f64) -> Model {
        let p = fixtures::unidirectional_reference().with("m21", m21).unwrap();
        validate(p, Variant::Unidirectional).unwrap()
    }

    #[test]
    fn general_catalog_is_origin_only() {
        let m = validate(fixtures::general_reference(), Variant::General).unwrap();
        let c = closed_form_equilibria(&m);
        assert_eq!(c.entries.len(), 1);
        assert_eq!(c.entries[0].equilibrium.identity, EquilibriumId::Origin);
    }

    #[test]
    fn e1_reference_point() {
        let c = closed_form_equilibria(&uni(1.0));
        let e1 = c.get(EquilibriumId::E1).unwrap();
        assert_eq!(e1.equilibrium.point, State::new(0.0, 0.0, 1.5, 1.5));
        assert!(e1.equilibrium.feasible);
        assert_eq!(e1.equilibrium.residual, 0.0);
    }

    #[test]
    fn e2_reference_point() {
        let c = closed_form_equilibria(&uni(2.0));
        let e2 = c.get(EquilibriumId::E2).unwrap();
        assert_eq!(e2.equilibrium.point, State::new(1.0, 0.0, 1.5, 2.5));
        assert!(e2.equilibrium.feasible);
        assert!(e2.equilibrium.residual < 1e-15);
        assert_eq!(e2.feasibility.coincides_with, None);
    }

    #[test]
    fn e2_feasibility_cases() {
        assert!(feasibility_e2(&uni(2.0)).unwrap().feasible);
        let boundary = feasibility_e2(&uni(1.0)).unwrap();
        assert!(boundary.feasible);
        assert_eq!(boundary.coincides_with, Some(EquilibriumId::E1));
        let p = fixtures::unidirectional_reference().with("A", 5.0).unwrap();
        let m = validate(p, Variant::Unidirectional).unwrap();
        let r = feasibility_e2(&m).unwrap();
        assert!(!r.feasible);
        assert_eq!((r.checks[0].lhs, r.checks[0].rhs), (1.0, 5.0));
        let c = closed_form_equilibria(&m);
        assert!(!c.get(EquilibriumId::E2).unwrap().equilibrium.feasible);
    }

    #[test]
    fn boundary_e2_duplicates_e1() {
        let c = closed_form_equilibria(&uni(1.0));
        let e1 = c.get(EquilibriumId::E1).unwrap().equilibrium.point;
        let e2 = c.get(EquilibriumId::E2).unwrap().equilibrium.point;
        assert_eq!(e1, e2);
    }

    #[test]
    fn z1_reference_branches() {
        let m = validate(fixtures::z1_reference(), Variant::NoInfectedMigration).unwrap();
        let c = closed_form_equilibria(&m);
        let plus = c.get(EquilibriumId::Z1Plus).unwrap();
        let minus = c.get(EquilibriumId::Z1Minus).unwrap();
        assert_eq!(plus.feasibility.ell, Some(46.0));
        assert!((plus.feasibility.discriminant.unwrap() - 964.0).abs() < 1e-9);
        let expected = [(46.0 + 964f64.sqrt()) / 14.4, (46.0 - 964f64.sqrt()) / 14.4];
        for (e, want) in [plus, minus].iter().zip(expected) {
            let pt = e.equilibrium.point;
            assert_eq!(pt.s1, 4.0);
            assert!((pt.s2 - want).abs() < 1e-12);
            assert!((pt.i1 - (4.0 + 0.8 * want)).abs() < 1e-12);
            assert_eq!(pt.i2, 0.0);
            assert!(e.equilibrium.residual <= RESIDUAL_LIMIT);
            assert!(e.equilibrium.feasible);
        }
        assert!((plus.equilibrium.point.s2 - 5.3506).abs() < 1e-4);
        assert!((minus.equilibrium.point.s2 - 1.0383).abs() < 1e-4);
    }

    #[test]
    fn z1_feasibility_sides() {
        let m = validate(fixtures::z1_reference(), Variant::NoInfectedMigration).unwrap();
        let r = feasibility_z1(&m).unwrap();
        assert!(r.feasible);
        assert_eq!((r.checks[0].lhs, r.checks[0].rhs), (44.0, 90.0));
    }

    #[test]
    fn z2_reference_feasible() {
        let m = validate(fixtures::z2_reference(), Variant::NoInfectedMigration).unwrap();
        let r = feasibility_z2(&m).unwrap();
        assert!(r.feasible);
        assert_eq!(r.h, Some(37.0));
        let c = closed_form_equilibria(&m);
        for id in [EquilibriumId::Z2Plus, EquilibriumId::Z2Minus] {
            let e = c.get(id).unwrap();
            assert_eq!(e.equilibrium.point.i1, 0.0);
            assert!(e.equilibrium.residual <= RESIDUAL_LIMIT);
        }
    }

    #[test]
    fn symmetric_set_has_no_feasible_disease_free_patch() {
        let m = validate(fixtures::no_migrate_coexistence(), Variant::NoInfectedMigration).unwrap();
        assert!(!feasibility_z1(&m).unwrap().feasible);
        assert!(!feasibility_z2(&m).unwrap().feasible);
    }

    #[test]
    fn negative_discriminant_reported_as_complex_branch() {
        // ell > 0 but too small for real roots
        let p = fixtures::z1_reference().with("m12", 8.0).unwrap();
        let m = validate(p, Variant::NoInfectedMigration).unwrap();
        let c = closed_form_equilibria(&m);
        let branch = c.complex_branches.iter().find(|b| b.pair == "Z1").unwrap();
        assert!(branch.discriminant < 0.0);
        assert!(c.get(EquilibriumId::Z1Plus).is_none());
        assert!(branch.feasibility.checks[0].holds);
        assert!(!branch.feasibility.feasible);
    }

    #[test]
    fn no_migrate_coexistence_point() {
        let m = validate(fixtures::no_migrate_coexistence(), Variant::NoInfectedMigration).unwrap();
        let e = coexistence_closed_form_no_migrate(&m).unwrap();
        assert_eq!(e.equilibrium.point, State::splat(1.5));
        assert_eq!(e.equilibrium.residual, 0.0);
        assert!(e.feasibility.feasible);
        let sides: Vec<(f64, f64)> = e.feasibility.checks.iter().map(|c| (c.lhs, c.rhs)).collect();
        assert!((sides[0].0 - 2.1).abs() < 1e-12 && (sides[0].1 - 0.6).abs() < 1e-12);
        assert!((sides[1].0 - 2.1).abs() < 1e-12 && (sides[1].1 - 0.6).abs() < 1e-12);
    }

    #[test]
    fn strong_emigration_makes_coexistence_infeasible() {
        let p = fixtures::no_migrate_coexistence().with("m21", 20.0).unwrap();
        let m = validate(p, Variant::NoInfectedMigration).unwrap();
        let e = coexistence_closed_form_no_migrate(&m).unwrap();
        assert!(e.equilibrium.point.i1 < 0.0);
        assert!(!e.equilibrium.feasible);
        assert!(!e.feasibility.checks[0].holds);
        assert!(e.feasibility.notes[0].starts_with("negative I1"));
    }

    #[test]
    fn wrong_variant_rejected() {
        let m = validate(fixtures::general_reference(), Variant::General).unwrap();
        assert!(matches!(feasibility_e2(&m), Err(Error::WrongVariant { .. })));
        assert!(feasibility_z1(&m).is_err());
        assert!(coexistence_closed_form_no_migrate(&m).is_err());
    }
}
