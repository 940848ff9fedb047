//! Necessary feasibility conditions for general-model coexistence, evaluated
//! on a candidate point.
//!
//! These are diagnostics only: the coexistence point itself comes from the
//! Newton search. The closed expression for `S2` in terms of the infected
//! levels is evaluated exactly in its expanded form, including its
//! `gamma1*mu1*I1*I2` term.

use serde::Serialize;

use super::{require, InequalityCheck, Relation};
use crate::error::Result;
use crate::model::{Model, State, Variant};

/// One of the four combinations of an inequality set with an `I1` interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalPairing {
    pub set: u8,
    pub interval: u8,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub zero_infected: bool,
    /// `r1*gamma2*I2 - r2*gamma1*I1`.
    pub s2_denominator: f64,
    /// Set when `s2_denominator` vanishes; `s2_formula` is then absent.
    pub division_by_zero: bool,
    pub s2_formula: Option<f64>,
    pub first_set: Vec<InequalityCheck>,
    pub first_set_holds: bool,
    pub second_set: Vec<InequalityCheck>,
    pub second_set_holds: bool,
    pub interval_one: Vec<InequalityCheck>,
    pub interval_two: Vec<InequalityCheck>,
    pub pairings: Vec<IntervalPairing>,
}

pub fn general_coexistence_conditions(candidate: &State, model: &Model) -> Result<ConditionReport> {
    require(model, Variant::General)?;
    candidate.check_finite()?;
    let p = model.params();
    let State { s2, i1, i2, .. } = *candidate;

    let s2_denominator = p.r1 * p.gamma2 * i2 - p.r2 * p.gamma1 * i1;
    let division_by_zero = s2_denominator == 0.0;
    let s2_formula = (!division_by_zero).then(|| {
        (p.r1 * ((p.delta1 + p.mu1) * i1 + (p.delta2 + p.mu2) * i2)
            - p.gamma1 * p.mu1 * i1 * i1
            - p.gamma1 * p.mu1 * i1 * i2)
            / s2_denominator
    });

    let i1_threshold = p.r1 * p.gamma2 * i2 / (p.r2 * p.gamma1);
    let s2_bound = (p.mu1 * i1 + p.mu2 * i2) / p.r2;
    let i2_bound = (p.gamma1 * p.mu1 * i1 * i1 - p.r1 * (p.delta1 + p.mu1) * i1)
        / (p.r1 * (p.delta2 + p.mu2) - p.gamma1 * p.mu2 * i1);

    let first_set = vec![
        InequalityCheck::new("I1 > r1*gamma2*I2/(r2*gamma1)", i1, Relation::Gt, i1_threshold),
        InequalityCheck::new("S2 <= (mu1*I1 + mu2*I2)/r2", s2, Relation::Le, s2_bound),
        InequalityCheck::new(
            "I2 >= (gamma1*mu1*I1^2 - r1*(delta1+mu1)*I1)/(r1*(delta2+mu2) - gamma1*mu2*I1)",
            i2,
            Relation::Ge,
            i2_bound,
        ),
    ];
    let second_set = vec![
        InequalityCheck::new("I1 < r1*gamma2*I2/(r2*gamma1)", i1, Relation::Lt, i1_threshold),
        InequalityCheck::new("S2 <= (mu1*I1 + mu2*I2)/r2", s2, Relation::Le, s2_bound),
        InequalityCheck::new(
            "I2 <= (gamma1*mu1*I1^2 - r1*(delta1+mu1)*I1)/(r1*(delta2+mu2) - gamma1*mu2*I1)",
            i2,
            Relation::Le,
            i2_bound,
        ),
    ];

    let lo = (p.delta2 + p.mu2) / (p.gamma1 * p.mu2);
    let hi = (p.delta1 + p.mu1) / (p.gamma2 * p.mu1);
    let interval_one = vec![
        InequalityCheck::new("I1 > (delta2+mu2)/(gamma1*mu2)", i1, Relation::Gt, lo),
        InequalityCheck::new("I1 <= (delta1+mu1)/(gamma2*mu1)", i1, Relation::Le, hi),
    ];
    let interval_two = vec![
        InequalityCheck::new("I1 >= (delta1+mu1)/(gamma2*mu1)", i1, Relation::Ge, hi),
        InequalityCheck::new("I1 < (delta2+mu2)/(gamma1*mu2)", i1, Relation::Lt, lo),
    ];

    let all = |v: &[InequalityCheck]| v.iter().all(|c| c.holds);
    let first_set_holds = all(&first_set);
    let second_set_holds = all(&second_set);
    // which interval goes with which set is not specified, so every pairing is reported
    let mut pairings = Vec::with_capacity(4);
    for (set, set_holds) in [(1, first_set_holds), (2, second_set_holds)] {
        for (interval, checks) in [(1, &interval_one), (2, &interval_two)] {
            pairings.push(IntervalPairing {
                set,
                interval,
                holds: set_holds && all(checks),
            });
        }
    }

    Ok(ConditionReport {
        zero_infected: i1 == 0.0 && i2 == 0.0,
        s2_denominator,
        division_by_zero,
        s2_formula,
        first_set,
        first_set_holds,
        second_set,
        second_set_holds,
        interval_one,
        interval_two,
        pairings,
    })
}
