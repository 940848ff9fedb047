//! The JSON run report. Field order is declaration order, so output is
//! stable across runs.

use std::path::Path;

use metaepi::dynamics::{OscillationReport, SolverStats, SteadyState};
use metaepi::equilibria::{
    general_coexistence_conditions, residual, ComplexBranch, ConditionReport, Equilibrium, EquilibriumId,
    FeasibilityReport, Provenance,
};
use metaepi::stability::{classify, Crossing, ScanPath, StabilityReport, Verdict};
use metaepi::{Error, Model, State, Variant};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_hash: String,
    pub config: ScenarioConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibria: Option<EquilibriaSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectorySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
}

impl RunReport {
    pub fn new(command: &'static str, config: &ScenarioConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: config.hash(),
            config: config.clone(),
            equilibria: None,
            trajectory: None,
            scan: None,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

#[derive(Debug, Serialize)]
pub struct EquilibriumEntry {
    pub equilibrium: Equilibrium,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasibilityReport>,
    /// Closed-form entry this numeric root lands on.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches: Option<EquilibriumId>,
    /// General-variant coexistence inequalities evaluated at the root.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability_error: Option<String>,
}

impl EquilibriumEntry {
    pub fn new(equilibrium: Equilibrium, feasibility: Option<FeasibilityReport>, model: &Model) -> Self {
        let (stability, stability_error) = match classify(&equilibrium, model) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let interior = equilibrium.identity == EquilibriumId::CoexistenceNumeric;
        let conditions = (interior && model.variant() == Variant::General)
            .then(|| general_coexistence_conditions(&equilibrium.point, model).ok())
            .flatten();
        Self {
            equilibrium,
            feasibility,
            matches: None,
            conditions,
            stability,
            stability_error,
        }
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.stability.as_ref().map(|s| s.verdict)
    }
}

/// Wraps a Newton root in an [`Equilibrium`]; interior iff all components are positive.
pub fn numeric_equilibrium(point: State, model: &Model) -> Equilibrium {
    let interior = point.to_array().iter().all(|&v| v > 0.0);
    Equilibrium {
        point,
        identity: if interior {
            EquilibriumId::CoexistenceNumeric
        } else {
            EquilibriumId::BoundaryNumeric
        },
        feasible: point.to_array().iter().all(|&v| v >= 0.0),
        provenance: Provenance::NewtonSolve,
        residual: residual(&point, model),
    }
}

#[derive(Debug, Serialize)]
pub struct EquilibriaSection {
    pub closed_form: Vec<EquilibriumEntry>,
    pub complex_branches: Vec<ComplexBranch>,
    pub numeric: Vec<EquilibriumEntry>,
    pub seeds: usize,
    pub seed_failures: usize,
    pub discarded_infeasible: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct TrajectorySummary {
    pub t_end: f64,
    pub samples: usize,
    pub final_state: State,
    pub min_component: f64,
    pub stats: SolverStats,
    pub steady_state: SteadyState,
    /// Newton-polished terminal point and its classification, when converged.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged_to: Option<EquilibriumEntry>,
    pub oscillation: OscillationReport,
}

#[derive(Debug, Serialize)]
pub struct ScanSection {
    pub path: ScanPath,
    pub points: usize,
    pub crossings: Vec<Crossing>,
    pub gaps: Vec<Error>,
    /// Spectral verdict of the tracked coexistence point at each grid value.
    pub verdicts: Vec<Option<Verdict>>,
}
