//! Tracking the unidirectional coexistence point along a parameter path and
//! locating Hopf crossings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::indicators::indicators_from_jacobian;
use crate::equilibria::RESIDUAL_LIMIT;
use crate::equilibria::{default_seed_grid, newton_polish, residual, solve_coexistence_numeric, NewtonOptions};
use crate::error::{Error, Result};
use crate::linearization::{eigenvalues, jacobian_unchecked};
use crate::model::{Model, ParameterSet, State, Variant};

/// Relative bracket width at which bisection stops.
const BISECTION_WIDTH: f64 = 1e-6;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanPath {
    pub parameter: String,
    pub start: f64,
    pub end: f64,
    /// Number of grid intervals; the grid has `steps + 1` points.
    pub steps: usize,
}

impl ScanPath {
    pub fn values(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|i| {
                if i == self.steps {
                    self.end
                } else {
                    self.start + (self.end - self.start) * i as f64 / self.steps as f64
                }
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        if !ParameterSet::NAMES.contains(&self.parameter.as_str()) {
            return Err(Error::UnknownParameter(self.parameter.clone()));
        }
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(Error::InvalidPath("endpoints must be finite".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidPath("steps must be at least 1".into()));
        }
        if self.start == self.end {
            return Err(Error::InvalidPath("start and end coincide".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub value: f64,
    /// Coexistence point, absent at a gap.
    pub equilibrium: Option<State>,
    pub a1: Option<f64>,
    pub a0: Option<f64>,
    pub k: Option<f64>,
    pub h: Option<f64>,
    /// Largest real part over all eigenvalues.
    pub max_real_part: Option<f64>,
    /// Largest real part over complex-conjugate pairs, if any.
    pub max_complex_real_part: Option<f64>,
    /// Why the point is a gap.
    pub gap: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Channel {
    /// `a1` changes sign with `a0 > 0, k < 0, h < 0`.
    Indicator,
    /// Real part of a complex pair changes sign.
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub channel: Channel,
    /// Index of the grid interval containing the crossing.
    pub interval: usize,
    pub lower: f64,
    pub upper: f64,
    /// Bisected location.
    pub value: f64,
    /// Bisection reached the target width.
    pub refined: bool,
    /// The other channel reports a crossing within one grid cell.
    pub agreement: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfScan {
    pub path: ScanPath,
    pub points: Vec<ScanPoint>,
    pub crossings: Vec<Crossing>,
    /// `EquilibriumLost` for every gap point.
    pub gaps: Vec<Error>,
}

impl HopfScan {
    pub fn channel(&self, channel: Channel) -> impl Iterator<Item = &Crossing> {
        self.crossings.iter().filter(move |c| c.channel == channel)
    }
}

fn model_at(base: &Model, name: &str, value: f64) -> Result<Model> {
    Model::new(base.params().with(name, value)?, base.variant())
}

fn is_interior(x: &State) -> bool {
    x.to_array().iter().all(|&v| v > 0.0)
}

/// Newton from the previous point, falling back to the seed grid.
fn track(model: &Model, previous: Option<&State>) -> Option<State> {
    let opts = NewtonOptions::default();
    if let Some(prev) = previous {
        if let Ok(x) = newton_polish(model, prev, &opts) {
            if is_interior(&x) && residual(&x, model) < RESIDUAL_LIMIT {
                return Some(x);
            }
        }
    }
    let search = solve_coexistence_numeric(model, &default_seed_grid()).ok()?;
    let mut interior: Vec<State> = search.interior().map(|e| e.point).collect();
    if let Some(prev) = previous {
        interior.sort_by(|a, b| a.distance(prev).total_cmp(&b.distance(prev)));
    }
    interior.into_iter().next()
}

struct Sample {
    a1: f64,
    a0: f64,
    k: f64,
    h: f64,
    max_real_part: f64,
    max_complex_real_part: Option<f64>,
}

fn sample(model: &Model, x: &State) -> Result<Sample> {
    let arr = x.to_array();
    let jac = jacobian_unchecked(&arr, model);
    let ind = indicators_from_jacobian(&arr, &jac, model);
    let spectrum = eigenvalues(&jac)?;
    Ok(Sample {
        a1: ind.a1,
        a0: ind.a0,
        k: ind.k,
        h: ind.h,
        max_real_part: spectrum.max_real_part,
        max_complex_real_part: spectrum.max_complex_real_part(),
    })
}

fn indicator_value(s: &Sample) -> Option<f64> {
    (s.a0 > 0.0 && s.k < 0.0 && s.h < 0.0).then_some(s.a1)
}

fn channel_value(channel: Channel, s: &Sample) -> Option<f64> {
    match channel {
        Channel::Indicator => indicator_value(s),
        Channel::Spectral => s.max_complex_real_part,
    }
}

fn sign_change(a: f64, b: f64) -> bool {
    (a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)
}

/// Scans `path` over a unidirectional model. Points where no interior
/// coexistence root is found become gaps; the scan carries on past them.
pub fn hopf_scan(model: &Model, path: &ScanPath) -> Result<HopfScan> {
    if model.variant() != Variant::Unidirectional {
        return Err(Error::WrongVariant {
            expected: Variant::Unidirectional,
            actual: model.variant(),
        });
    }
    path.check()?;
    let values = path.values();
    let models = values
        .iter()
        .map(|&v| model_at(model, &path.parameter, v))
        .collect::<Result<Vec<_>>>()?;

    // sequential warm-start pass
    let mut branch: Vec<Option<State>> = Vec::with_capacity(values.len());
    let mut previous: Option<State> = None;
    for m in &models {
        let found = track(m, previous.as_ref());
        if found.is_some() {
            previous = found;
        }
        branch.push(found);
    }

    let samples: Vec<Option<Result<Sample>>> = models
        .par_iter()
        .zip(&branch)
        .map(|(m, x)| x.as_ref().map(|x| sample(m, x)))
        .collect();

    let mut points = Vec::with_capacity(values.len());
    let mut gaps = Vec::new();
    let mut usable: Vec<Option<Sample>> = Vec::with_capacity(values.len());
    for ((&value, x), s) in values.iter().zip(&branch).zip(samples) {
        let (s, gap) = match s {
            None => (None, Some("no interior coexistence root".to_string())),
            Some(Err(e)) => (None, Some(e.to_string())),
            Some(Ok(s)) => (Some(s), None),
        };
        if gap.is_some() {
            gaps.push(Error::EquilibriumLost {
                parameter: path.parameter.clone(),
                value,
            });
        }
        points.push(ScanPoint {
            value,
            equilibrium: if gap.is_none() { *x } else { None },
            a1: s.as_ref().map(|s| s.a1),
            a0: s.as_ref().map(|s| s.a0),
            k: s.as_ref().map(|s| s.k),
            h: s.as_ref().map(|s| s.h),
            max_real_part: s.as_ref().map(|s| s.max_real_part),
            max_complex_real_part: s.as_ref().and_then(|s| s.max_complex_real_part),
            gap,
        });
        usable.push(s);
    }

    let mut crossings = Vec::new();
    for channel in [Channel::Indicator, Channel::Spectral] {
        for i in 0..values.len() - 1 {
            let (Some(sa), Some(sb)) = (&usable[i], &usable[i + 1]) else {
                continue;
            };
            let (Some(fa), Some(fb)) = (channel_value(channel, sa), channel_value(channel, sb)) else {
                continue;
            };
            if !sign_change(fa, fb) {
                continue;
            }
            let start = branch[i].expect("sampled point has a root");
            let (value, lower, upper, refined) =
                bisect(model, &path.parameter, channel, values[i], values[i + 1], fa, start);
            crossings.push(Crossing {
                channel,
                interval: i,
                lower,
                upper,
                value,
                refined,
                agreement: false,
            });
        }
    }
    let intervals: Vec<(Channel, usize)> = crossings.iter().map(|c| (c.channel, c.interval)).collect();
    for c in &mut crossings {
        c.agreement = intervals
            .iter()
            .any(|&(ch, iv)| ch != c.channel && iv.abs_diff(c.interval) <= 1);
    }

    Ok(HopfScan {
        path: path.clone(),
        points,
        crossings,
        gaps,
    })
}

/// Bisects a sign change of the channel value on `[a, b]`, re-solving the
/// equilibrium at each midpoint from the last accepted root.
fn bisect(
    base: &Model,
    name: &str,
    channel: Channel,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut root: State,
) -> (f64, f64, f64, bool) {
    let opts = NewtonOptions::default();
    for _ in 0..MAX_BISECTIONS {
        let width = (b - a).abs();
        if width <= BISECTION_WIDTH * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            return (0.5 * (a + b), a.min(b), a.max(b), true);
        }
        let mid = 0.5 * (a + b);
        let value = model_at(base, name, mid).ok().and_then(|m| {
            let x = newton_polish(&m, &root, &opts).ok().filter(is_interior)?;
            let s = sample(&m, &x).ok()?;
            Some((x, channel_value(channel, &s)?))
        });
        let Some((x, fm)) = value else {
            return (0.5 * (a + b), a.min(b), a.max(b), false);
        };
        root = x;
        if sign_change(fa, fm) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    (0.5 * (a + b), a.min(b), a.max(b), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::validate;

    fn hopf_model() -> Model {
        validate(fixtures::unidirectional_hopf(), Variant::Unidirectional).unwrap()
    }

    #[test]
    fn both_channels_find_the_crossing() {
        let path = ScanPath {
            parameter: "delta1".into(),
            start: 0.5,
            end: 2.0,
            steps: 30,
        };
        let scan = hopf_scan(&hopf_model(), &path).unwrap();
        assert!(scan.gaps.is_empty(), "{:?}", scan.gaps);
        let ind: Vec<_> = scan.channel(Channel::Indicator).collect();
        let spec: Vec<_> = scan.channel(Channel::Spectral).collect();
        assert_eq!(ind.len(), 1, "{:?}", scan.crossings);
        assert_eq!(spec.len(), 1);
        assert!(ind[0].refined && spec[0].refined);
        assert!(ind[0].agreement && spec[0].agreement);
        assert!((ind[0].value - 1.38).abs() < 0.02);
        assert!((ind[0].value - spec[0].value).abs() < 1e-5);
        assert!((ind[0].upper - ind[0].lower) <= 1e-6 * ind[0].upper);
    }

    #[test]
    fn no_crossing_in_a_parameter_the_block_ignores() {
        let m = validate(
            fixtures::unidirectional_hopf().with("delta1", 2.0).unwrap(),
            Variant::Unidirectional,
        )
        .unwrap();
        let path = ScanPath {
            parameter: "B".into(),
            start: 0.05,
            end: 0.2,
            steps: 10,
        };
        let scan = hopf_scan(&m, &path).unwrap();
        assert!(scan.crossings.is_empty(), "{:?}", scan.crossings);
        assert!(scan.gaps.is_empty());
    }

    #[test]
    fn losing_feasibility_leaves_gaps() {
        // a strong outflow from patch 1 drives its coexistence root out of the orthant
        let path = ScanPath {
            parameter: "m21".into(),
            start: 0.5,
            end: 5.0,
            steps: 10,
        };
        let scan = hopf_scan(&hopf_model(), &path).unwrap();
        assert!(!scan.gaps.is_empty());
        assert!(scan.points.iter().any(|p| p.equilibrium.is_some()));
        assert!(scan
            .gaps
            .iter()
            .all(|g| matches!(g, Error::EquilibriumLost { parameter, .. } if parameter == "m21")));
    }

    #[test]
    fn path_validation() {
        let m = hopf_model();
        let bad = ScanPath {
            parameter: "zeta".into(),
            start: 0.0,
            end: 1.0,
            steps: 4,
        };
        assert!(matches!(hopf_scan(&m, &bad), Err(Error::UnknownParameter(_))));
        let g = validate(fixtures::general_reference(), Variant::General).unwrap();
        let ok = ScanPath {
            parameter: "delta1".into(),
            start: 0.5,
            end: 1.0,
            steps: 4,
        };
        assert!(matches!(hopf_scan(&g, &ok), Err(Error::WrongVariant { .. })));
        let zero = ScanPath { steps: 0, ..ok };
        assert!(matches!(hopf_scan(&m, &zero), Err(Error::InvalidPath(_))));
    }
}
