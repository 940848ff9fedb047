//! Simulation and stability analysis for a two-patch SIS metapopulation whose
//! migration corridors saturate.
//!
//! The crate covers three migration scenarios ([`Variant`]): full two-way
//! migration, a one-way corridor from patch 1 into patch 2, and a scenario
//! where infected individuals stay in their patch. For each it provides the
//! right-hand side, the analytic Jacobian, closed-form and numeric
//! equilibria with feasibility diagnostics, eigenvalue-based stability
//! verdicts cross-checked against Routh-Hurwitz style criteria, Hopf
//! crossing scans and an adaptive integrator.

pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod fixtures;
pub mod linearization;
pub mod model;
pub mod poly;
pub mod stability;

pub use error::{Error, Result};
pub use linearization::{EigenSpectrum, Matrix4};
pub use model::{validate, Model, ParameterSet, State, Variant};
