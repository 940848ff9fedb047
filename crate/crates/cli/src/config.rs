//! Scenario files: a variant tag, the full parameter set, an initial state,
//! solver settings and an optional scan path, in TOML.

use std::path::Path;

use metaepi::dynamics::{IntegrateOptions, Sampling, DEFAULT_ATOL, DEFAULT_HORIZON, DEFAULT_RTOL, DEFAULT_WINDOW};
use metaepi::equilibria::DEFAULT_SEED_VALUES;
use metaepi::stability::ScanPath;
use metaepi::{validate, Model, ParameterSet, State, Variant};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Steady-state tolerance on both the window variation and `|rhs|`.
pub const DEFAULT_STEADY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub variant: Variant,
    pub params: ParameterSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<State>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanPath>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    pub max_steps: usize,
    pub t_end: f64,
    /// Uniform output spacing; every accepted step is written when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_interval: Option<f64>,
    /// Trailing window for the steady-state and oscillation diagnostics.
    pub window: f64,
    pub steady_tol: f64,
    /// Per-component seed values for the Newton search; seeds are the tensor grid.
    pub seed_grid: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let base = IntegrateOptions::default();
        Self {
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
            initial_step: None,
            max_step: None,
            max_steps: base.max_steps,
            t_end: DEFAULT_HORIZON,
            output_interval: None,
            window: DEFAULT_WINDOW,
            steady_tol: DEFAULT_STEADY_TOL,
            seed_grid: DEFAULT_SEED_VALUES.to_vec(),
        }
    }
}

impl SolverConfig {
    pub fn integrate_options(&self) -> IntegrateOptions {
        IntegrateOptions {
            rtol: self.rtol,
            atol: self.atol,
            initial_step: self.initial_step,
            max_step: self.max_step,
            max_steps: self.max_steps,
            sampling: match self.output_interval {
                Some(dt) => Sampling::Interval(dt),
                None => Sampling::Steps,
            },
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub t_end: Option<f64>,
    pub seed_grid: Option<Vec<f64>>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.rtol {
            self.solver.rtol = v;
        }
        if let Some(v) = o.atol {
            self.solver.atol = v;
        }
        if let Some(v) = o.t_end {
            self.solver.t_end = v;
        }
        if let Some(v) = &o.seed_grid {
            self.solver.seed_grid = v.clone();
        }
    }

    pub fn model(&self) -> Result<Model, CliError> {
        validate(self.params, self.variant).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config always serializes")
    }

    /// SHA-256 of the canonical TOML form, so equivalent files hash alike.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use metaepi::fixtures;

    fn sample() -> ScenarioConfig {
        ScenarioConfig {
            variant: Variant::Unidirectional,
            params: fixtures::unidirectional_hopf(),
            initial: Some(State::new(5.0, 0.5, 1.5, 2.3)),
            solver: SolverConfig {
                output_interval: Some(0.1),
                max_step: Some(0.7),
                ..Default::default()
            },
            scan: Some(ScanPath {
                parameter: "delta1".into(),
                start: 0.5,
                end: 2.0,
                steps: 30,
            }),
        }
    }

    #[test]
    fn round_trip() {
        let c = sample();
        assert_eq!(ScenarioConfig::parse(&c.to_toml()).unwrap(), c);
        let bare = ScenarioConfig {
            initial: None,
            scan: None,
            solver: SolverConfig::default(),
            ..c
        };
        assert_eq!(ScenarioConfig::parse(&bare.to_toml()).unwrap(), bare);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = sample().to_toml().replace("[solver]", "[solver]\nrtoll = 1e-6");
        let err = ScenarioConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("rtoll"), "{err}");
    }

    #[test]
    fn missing_parameter_is_named() {
        let text = sample().to_toml().replace("gamma1 = 1.0\n", "");
        let err = ScenarioConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("gamma1"), "{err}");
    }

    #[test]
    fn overrides_change_the_hash() {
        let mut c = sample();
        let before = c.hash();
        assert_eq!(before.len(), 64);
        c.apply(&Overrides {
            rtol: Some(1e-10),
            ..Default::default()
        });
        assert_eq!(c.solver.rtol, 1e-10);
        assert_ne!(c.hash(), before);
    }
}
