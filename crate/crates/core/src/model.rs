//! Parameters, state and the right-hand side of the two-patch system.
//!
//! Susceptibles and infected live in patches 1 and 2 and move along
//! corridors whose throughput saturates (Holling type II): the flux of class
//! `X` out of patch `j` is `c * X_j / (K + S_j + I_j)` with maximal rate `c`
//! and half-saturation constant `K`. Migration coefficients follow the
//! "into i from j" convention, so `m21` moves susceptibles from patch 1 to
//! patch 2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rate constants and saturation constants of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSet {
    pub r1: f64,
    pub r2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub m12: f64,
    pub m21: f64,
    pub n12: f64,
    pub n21: f64,
    /// Susceptible half-saturation constant.
    #[serde(rename = "A")]
    pub a: f64,
    /// Infected half-saturation constant.
    #[serde(rename = "B")]
    pub b: f64,
}

impl ParameterSet {
    pub const NAMES: [&'static str; 14] = [
        "r1", "r2", "gamma1", "gamma2", "delta1", "delta2", "mu1", "mu2", "m12", "m21", "n12", "n21", "A", "B",
    ];

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(*self.field(name)?)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        *self.field_mut(name)? = value;
        Ok(())
    }

    /// Copy with one named parameter replaced.
    pub fn with(mut self, name: &str, value: f64) -> Result<Self> {
        self.set(name, value)?;
        Ok(self)
    }

    fn field(&self, name: &str) -> Result<&f64> {
        Ok(match name {
            "r1" => &self.r1,
            "r2" => &self.r2,
            "gamma1" => &self.gamma1,
            "gamma2" => &self.gamma2,
            "delta1" => &self.delta1,
            "delta2" => &self.delta2,
            "mu1" => &self.mu1,
            "mu2" => &self.mu2,
            "m12" => &self.m12,
            "m21" => &self.m21,
            "n12" => &self.n12,
            "n21" => &self.n21,
            "A" => &self.a,
            "B" => &self.b,
            other => return Err(Error::UnknownParameter(other.to_string())),
        })
    }

    fn field_mut(&mut self, name: &str) -> Result<&mut f64> {
        Ok(match name {
            "r1" => &mut self.r1,
            "r2" => &mut self.r2,
            "gamma1" => &mut self.gamma1,
            "gamma2" => &mut self.gamma2,
            "delta1" => &mut self.delta1,
            "delta2" => &mut self.delta2,
            "mu1" => &mut self.mu1,
            "mu2" => &mut self.mu2,
            "m12" => &mut self.m12,
            "m21" => &mut self.m21,
            "n12" => &mut self.n12,
            "n21" => &mut self.n21,
            "A" => &mut self.a,
            "B" => &mut self.b,
            other => return Err(Error::UnknownParameter(other.to_string())),
        })
    }

    fn entries(&self) -> [(&'static str, f64); 14] {
        [
            ("r1", self.r1),
            ("r2", self.r2),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("m12", self.m12),
            ("m21", self.m21),
            ("n12", self.n12),
            ("n21", self.n21),
            ("A", self.a),
            ("B", self.b),
        ]
    }
}

/// Migration scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Both classes migrate in both directions.
    General,
    /// Corridor open from patch 1 into patch 2 only (`m12 = n12 = 0`).
    Unidirectional,
    /// Infected stay put (`n12 = n21 = 0`) and do not congest the corridors.
    NoInfectedMigration,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::General, Variant::Unidirectional, Variant::NoInfectedMigration];

    pub fn allows_infected_migration(self) -> bool {
        !matches!(self, Variant::NoInfectedMigration)
    }

    /// Parameters this variant pins to zero.
    pub fn forced_zero(self) -> &'static [&'static str] {
        match self {
            Variant::General => &[],
            Variant::Unidirectional => &["m12", "n12"],
            Variant::NoInfectedMigration => &["n12", "n21"],
        }
    }
}

/// Population densities `(S1, I1, S2, I2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State {
    pub s1: f64,
    pub i1: f64,
    pub s2: f64,
    pub i2: f64,
}

/// Time derivative of a [`State`], same component layout.
pub type StateDerivative = State;

impl State {
    pub const COMPONENTS: [&'static str; 4] = ["S1", "I1", "S2", "I2"];

    pub const fn new(s1: f64, i1: f64, s2: f64, i2: f64) -> Self {
        Self { s1, i1, s2, i2 }
    }

    pub const fn splat(v: f64) -> Self {
        Self::new(v, v, v, v)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s1, self.i1, self.s2, self.i2]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Max-norm distance.
    pub fn distance(&self, other: &State) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteState)
        }
    }

    pub(crate) fn check_nonnegative(&self) -> Result<()> {
        self.check_finite()?;
        for (name, v) in Self::COMPONENTS.iter().zip(self.to_array()) {
            if v < 0.0 {
                return Err(Error::NegativeState {
                    component: name,
                    value: v,
                });
            }
        }
        Ok(())
    }
}

impl From<[f64; 4]> for State {
    fn from(x: [f64; 4]) -> Self {
        Self::from_array(x)
    }
}

/// A parameter set that passed validation for a given variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Model {
    params: ParameterSet,
    variant: Variant,
}

/// Checks the parameter invariants and pins variant-forced fields to exact zero.
pub fn validate(params: ParameterSet, variant: Variant) -> Result<Model> {
    Model::new(params, variant)
}

impl Model {
    pub fn new(mut params: ParameterSet, variant: Variant) -> Result<Self> {
        for (name, value) in params.entries() {
            if !value.is_finite() {
                return Err(Error::NonFiniteParameter { name, value });
            }
            if value < 0.0 {
                return Err(Error::NegativeParameter { name, value });
            }
        }
        let mut strictly_positive = vec!["r1", "r2", "gamma1", "gamma2", "mu1", "mu2", "A"];
        if variant.allows_infected_migration() {
            strictly_positive.push("B");
        }
        for name in strictly_positive {
            if params.get(name)? == 0.0 {
                return Err(Error::ZeroRequiredPositive { name });
            }
        }
        for &name in variant.forced_zero() {
            let value = params.get(name)?;
            if value != 0.0 {
                return Err(Error::VariantConflict { variant, name, value });
            }
            // normalizes -0.0
            params.set(name, 0.0)?;
        }
        Ok(Self { params, variant })
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Corridor denominators `(A + S1 [+ I1], A + S2 [+ I2])` for susceptibles.
    pub(crate) fn sus_denominators(&self, x: &[f64; 4]) -> (f64, f64) {
        let a = self.params.a;
        match self.variant {
            Variant::NoInfectedMigration => (a + x[0], a + x[2]),
            _ => (a + x[0] + x[1], a + x[2] + x[3]),
        }
    }

    pub(crate) fn inf_denominators(&self, x: &[f64; 4]) -> (f64, f64) {
        let b = self.params.b;
        (b + x[0] + x[1], b + x[2] + x[3])
    }

    pub(crate) fn flux_array(&self, x: &[f64; 4]) -> FluxBreakdown {
        let p = &self.params;
        let (d1, d2) = self.sus_denominators(x);
        let (sus_out_1, sus_in_1) = (p.m21 * x[0] / d1, p.m12 * x[2] / d2);
        let (inf_out_1, inf_in_1) = if self.variant.allows_infected_migration() {
            let (e1, e2) = self.inf_denominators(x);
            (p.n21 * x[1] / e1, p.n12 * x[3] / e2)
        } else {
            (0.0, 0.0)
        };
        FluxBreakdown {
            sus_out_1,
            sus_in_1,
            inf_out_1,
            inf_in_1,
        }
    }

    /// Flux-free local terms: births, infection, recovery and deaths.
    pub(crate) fn local_terms(&self, x: &[f64; 4]) -> [f64; 4] {
        let p = &self.params;
        let [s1, i1, s2, i2] = *x;
        [
            p.r1 * s1 - p.gamma1 * s1 * i1 + p.delta1 * i1,
            p.gamma1 * s1 * i1 - (p.delta1 + p.mu1) * i1,
            p.r2 * s2 - p.gamma2 * s2 * i2 + p.delta2 * i2,
            p.gamma2 * s2 * i2 - (p.delta2 + p.mu2) * i2,
        ]
    }

    /// Unchecked right-hand side used by the integrator and Newton solver.
    pub(crate) fn rhs_array(&self, x: &[f64; 4]) -> [f64; 4] {
        let local = self.local_terms(x);
        let f = self.flux_array(x);
        [
            local[0] - f.sus_out_1 + f.sus_in_1,
            local[1] - f.inf_out_1 + f.inf_in_1,
            local[2] + f.sus_out_1 - f.sus_in_1,
            local[3] + f.inf_out_1 - f.inf_in_1,
        ]
    }

    /// Net demographic growth `r1 S1 + r2 S2 - mu1 I1 - mu2 I2`; migration cancels in the total.
    pub fn total_growth(&self, state: &State) -> f64 {
        let p = &self.params;
        p.r1 * state.s1 + p.r2 * state.s2 - p.mu1 * state.i1 - p.mu2 * state.i2
    }
}

/// Saturated corridor fluxes seen from patch 1; patch 2 sees the same
/// magnitudes with in/out swapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxBreakdown {
    /// Susceptibles leaving patch 1 (`m21` corridor).
    pub sus_out_1: f64,
    /// Susceptibles arriving in patch 1 (`m12` corridor).
    pub sus_in_1: f64,
    pub inf_out_1: f64,
    pub inf_in_1: f64,
}

impl FluxBreakdown {
    pub fn sus_out_2(&self) -> f64 {
        self.sus_in_1
    }

    pub fn sus_in_2(&self) -> f64 {
        self.sus_out_1
    }

    pub fn inf_out_2(&self) -> f64 {
        self.inf_in_1
    }

    pub fn inf_in_2(&self) -> f64 {
        self.inf_out_1
    }
}

/// Right-hand side of the ODE system. Slightly negative states are accepted.
pub fn rhs(state: &State, model: &Model) -> Result<StateDerivative> {
    state.check_finite()?;
    Ok(State::from_array(model.rhs_array(&state.to_array())))
}

pub fn migration_flux(state: &State, model: &Model) -> Result<FluxBreakdown> {
    state.check_nonnegative()?;
    Ok(model.flux_array(&state.to_array()))
}

/// Demographic and epidemic terms without any migration.
pub fn local_dynamics(state: &State, model: &Model) -> Result<StateDerivative> {
    state.check_finite()?;
    Ok(State::from_array(model.local_terms(&state.to_array())))
}
