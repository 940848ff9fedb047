use serde::Serialize;
use thiserror::Error;

use crate::model::Variant;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum Error {
    #[error("parameter `{name}` is not finite ({value})")]
    NonFiniteParameter { name: &'static str, value: f64 },

    #[error("parameter `{name}` must be nonnegative, got {value}")]
    NegativeParameter { name: &'static str, value: f64 },

    #[error("parameter `{name}` must be strictly positive")]
    ZeroRequiredPositive { name: &'static str },

    #[error("{variant:?} variant requires `{name}` = 0, got {value}")]
    VariantConflict {
        variant: Variant,
        name: &'static str,
        value: f64,
    },

    #[error("state has a non-finite component")]
    NonFiniteState,

    #[error("state component {component} is negative ({value})")]
    NegativeState { component: &'static str, value: f64 },

    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),

    #[error("finite-difference Jacobian produced a non-finite entry")]
    NonFiniteResult,

    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,

    #[error("operation requires the {expected:?} variant, model is {actual:?}")]
    WrongVariant { expected: Variant, actual: Variant },

    #[error("seed {index} is not strictly positive")]
    NonPositiveSeed { index: usize },

    #[error("Newton iteration did not converge")]
    NoConvergence,

    #[error("Jacobian is singular")]
    SingularJacobian,

    #[error("equilibrium is infeasible")]
    InfeasibleEquilibrium,

    #[error("equilibrium residual {residual:e} exceeds {limit:e}")]
    ResidualTooLarge { residual: f64, limit: f64 },

    #[error("integration end time must be positive and finite, got {0}")]
    InvalidHorizon(f64),

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("invalid solver option: {0}")]
    InvalidSolverOption(String),

    #[error("component {component} reached {value:e} at t = {t}")]
    NegativityViolation {
        t: f64,
        component: &'static str,
        value: f64,
    },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("invalid scan path: {0}")]
    InvalidPath(String),

    #[error("coexistence equilibrium lost at {parameter} = {value}")]
    EquilibriumLost { parameter: String, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
