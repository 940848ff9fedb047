//! Damped Newton search for equilibria.

use nalgebra::Vector4;
use rayon::prelude::*;
use serde::Serialize;

use super::{catalog_order, Equilibrium, EquilibriumId, Provenance, RESIDUAL_LIMIT};
use crate::error::{Error, Result};
use crate::linearization::jacobian_unchecked;
use crate::model::{Model, State};

pub const DEFAULT_SEED_VALUES: [f64; 3] = [0.5, 1.5, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Relative tolerance on both the step and the residual.
    pub tolerance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            max_halvings: 30,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedFailure {
    pub index: usize,
    pub seed: State,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct NumericSearch {
    /// Distinct nonnegative roots, sorted by identity then point.
    pub roots: Vec<Equilibrium>,
    pub failures: Vec<SeedFailure>,
    /// Converged roots dropped for having a component below `-1e-9`.
    pub discarded_infeasible: usize,
}

impl NumericSearch {
    pub fn interior(&self) -> impl Iterator<Item = &Equilibrium> {
        self.roots
            .iter()
            .filter(|e| e.identity == EquilibriumId::CoexistenceNumeric)
    }
}

/// Tensor grid `values^4`.
pub fn seed_grid(values: &[f64]) -> Vec<State> {
    let mut seeds = Vec::with_capacity(values.len().pow(4));
    for &a in values {
        for &b in values {
            for &c in values {
                for &d in values {
                    seeds.push(State::new(a, b, c, d));
                }
            }
        }
    }
    seeds
}

pub fn default_seed_grid() -> Vec<State> {
    seed_grid(&DEFAULT_SEED_VALUES)
}

fn max_abs(v: &[f64; 4]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Newton iteration on `rhs = 0` with step halving on residual increase.
pub fn newton_polish(model: &Model, guess: &State, opts: &NewtonOptions) -> Result<State> {
    guess.check_finite()?;
    let mut x = guess.to_array();
    let mut f = model.rhs_array(&x);
    let mut fnorm = max_abs(&f);
    for _ in 0..opts.max_iterations {
        let scale = 1.0 + max_abs(&x);
        let jac = jacobian_unchecked(&x, model);
        let step = jac
            .lu()
            .solve(&-Vector4::from(f))
            .filter(|s| s.iter().all(|v| v.is_finite()))
            .ok_or(Error::SingularJacobian)?;

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: [f64; 4] = std::array::from_fn(|i| x[i] + alpha * step[i]);
            let ft = model.rhs_array(&trial);
            let norm = max_abs(&ft);
            if norm.is_finite() && norm <= fnorm {
                accepted = Some((trial, ft, norm));
                break;
            }
            alpha *= 0.5;
        }
        let Some((next, fnext, nnorm)) = accepted else {
            // no descent left: fine only if already at rounding level
            if fnorm <= 1e2 * opts.tolerance * scale {
                return Ok(State::from_array(x));
            }
            return Err(Error::NoConvergence);
        };
        let step_norm = alpha * max_abs(&[step[0], step[1], step[2], step[3]]);
        x = next;
        f = fnext;
        fnorm = nnorm;
        let scale = 1.0 + max_abs(&x);
        if step_norm <= opts.tolerance * scale && fnorm <= opts.tolerance * scale {
            return Ok(State::from_array(x));
        }
    }
    Err(Error::NoConvergence)
}

enum SeedOutcome {
    Root(State),
    Infeasible,
    Failed(Error),
}

fn solve_seed(model: &Model, seed: &State, opts: &NewtonOptions) -> SeedOutcome {
    let attempt = |s: &State| newton_polish(model, s, opts);
    let result = match attempt(seed) {
        Err(Error::SingularJacobian) => {
            let nudged = State::from_array(seed.to_array().map(|v| v * (1.0 + 1e-3)));
            attempt(&nudged)
        }
        other => other,
    };
    match result {
        Ok(root) => {
            let scale = 1.0 + root.max_abs();
            if root.to_array().iter().any(|&v| v < -1e-9) {
                return SeedOutcome::Infeasible;
            }
            let snapped = root
                .to_array()
                .map(|v| if v.abs() <= 1e-12 * scale { 0.0 } else { v.max(0.0) });
            SeedOutcome::Root(State::from_array(snapped))
        }
        Err(e) => SeedOutcome::Failed(e),
    }
}

/// Newton from every seed; converged roots are deduplicated and classified
/// as interior or boundary.
pub fn solve_coexistence_numeric(model: &Model, seeds: &[State]) -> Result<NumericSearch> {
    for (index, seed) in seeds.iter().enumerate() {
        if !(seed.is_finite() && seed.to_array().iter().all(|&v| v > 0.0)) {
            return Err(Error::NonPositiveSeed { index });
        }
    }
    let opts = NewtonOptions::default();
    let outcomes: Vec<SeedOutcome> = seeds.par_iter().map(|seed| solve_seed(model, seed, &opts)).collect();

    let mut search = NumericSearch::default();
    let mut points: Vec<State> = Vec::new();
    for (index, (outcome, seed)) in outcomes.into_iter().zip(seeds).enumerate() {
        match outcome {
            SeedOutcome::Root(p) => {
                let duplicate = points
                    .iter()
                    .any(|q| q.distance(&p) < 1e-6 * (1.0 + p.max_abs().max(q.max_abs())));
                if !duplicate {
                    points.push(p);
                }
            }
            SeedOutcome::Infeasible => search.discarded_infeasible += 1,
            SeedOutcome::Failed(e) => search.failures.push(SeedFailure {
                index,
                seed: *seed,
                reason: e.to_string(),
            }),
        }
    }
    for p in points {
        let comps = p.to_array();
        let identity = if comps.iter().all(|&v| v > 0.0) {
            EquilibriumId::CoexistenceNumeric
        } else if comps.iter().all(|&v| v == 0.0) {
            EquilibriumId::Origin
        } else {
            EquilibriumId::BoundaryNumeric
        };
        let eq = Equilibrium::new(p, identity, Provenance::NewtonSolve, true, model);
        if eq.residual < RESIDUAL_LIMIT {
            search.roots.push(eq);
        } else {
            search.failures.push(SeedFailure {
                index: usize::MAX,
                seed: p,
                reason: format!("residual {:e} above limit after polishing", eq.residual),
            });
        }
    }
    search.roots.sort_by(catalog_order);
    Ok(search)
}
