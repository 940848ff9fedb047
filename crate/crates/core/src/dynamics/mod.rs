//! Time integration with the Dormand-Prince 5(4) pair.
//!
//! Solutions started in the nonnegative orthant stay there. Components that
//! land within `atol` below zero are clipped; a step that overshoots further
//! is rejected and retried with a smaller step, and an overshoot beyond
//! `10 atol` is reported as [`Error::NegativityViolation`].

mod detect;

use serde::{Deserialize, Serialize};

pub use detect::{
    detect_oscillation, detect_steady_state, ComponentOscillation, OscillationReport, SteadyState, Trend,
    MIN_CYCLE_AMPLITUDE, PEAK_NOISE_FLOOR, TREND_TOL,
};

use crate::error::{Error, Result};
use crate::model::{Model, State};

pub const DEFAULT_RTOL: f64 = 1e-8;
pub const DEFAULT_ATOL: f64 = 1e-10;
/// Horizon for runs that look for a steady state.
pub const DEFAULT_HORIZON: f64 = 500.0;
/// Trailing window used by the steady-state and oscillation detectors.
pub const DEFAULT_WINDOW: f64 = 50.0;

/// Which times end up in the trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Every accepted step.
    Steps,
    /// Uniform grid `0, dt, 2 dt, ...` plus `t_end`, from the dense output.
    Interval(f64),
    /// Explicit increasing times in `[0, t_end]`, from the dense output.
    Times(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen automatically when absent.
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
    pub max_steps: usize,
    pub sampling: Sampling,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
            initial_step: None,
            max_step: None,
            max_steps: 10_000_000,
            sampling: Sampling::Steps,
        }
    }
}

impl IntegrateOptions {
    fn check(&self, t_end: f64) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rtol) || !positive(self.atol) {
            return Err(Error::InvalidSolverOption("tolerances must be positive".into()));
        }
        if self.initial_step.is_some_and(|h| !positive(h)) || self.max_step.is_some_and(|h| !positive(h)) {
            return Err(Error::InvalidSolverOption("step bounds must be positive".into()));
        }
        match &self.sampling {
            Sampling::Steps => {}
            Sampling::Interval(dt) if positive(*dt) => {}
            Sampling::Interval(_) => {
                return Err(Error::InvalidSolverOption("sampling interval must be positive".into()))
            }
            Sampling::Times(ts) => {
                let ordered = ts.windows(2).all(|w| w[0] < w[1]);
                let inside = ts.iter().all(|&t| t.is_finite() && (0.0..=t_end).contains(&t));
                if !ordered || !inside {
                    return Err(Error::InvalidSolverOption(
                        "sample times must be strictly increasing within [0, t_end]".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Steps rejected because a component fell more than `atol` below zero.
    pub negativity_rejections: usize,
    /// Components clipped to zero.
    pub clipped: usize,
    pub rhs_evaluations: usize,
    pub final_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub stats: SolverStats,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, State)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    pub fn span(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn min_component(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|s| s.to_array())
            .fold(f64::INFINITY, f64::min)
    }
}

type Vec4 = [f64; 4];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order solution minus the embedded fourth-order one.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Continuous extension coefficients.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// Dense output over one accepted step.
struct Interpolant {
    t0: f64,
    h: f64,
    r: [Vec4; 5],
}

impl Interpolant {
    fn eval(&self, t: f64) -> Vec4 {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.r;
        std::array::from_fn(|i| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i]))))
    }
}

struct Sampler {
    times: Vec<f64>,
    next: usize,
}

impl Sampler {
    fn new(sampling: &Sampling, t_end: f64) -> Option<Self> {
        let times = match sampling {
            Sampling::Steps => return None,
            Sampling::Interval(dt) => {
                let n = (t_end / dt).floor() as usize;
                let mut ts: Vec<f64> = (0..=n).map(|i| i as f64 * dt).filter(|&t| t < t_end).collect();
                ts.push(t_end);
                ts
            }
            Sampling::Times(ts) => ts.clone(),
        };
        Some(Self { times, next: 0 })
    }
}

fn rhs(model: &Model, y: &Vec4, stats: &mut SolverStats) -> Vec4 {
    stats.rhs_evaluations += 1;
    model.rhs_array(y)
}

fn error_norm(err: &Vec4, y0: &Vec4, y1: &Vec4, rtol: f64, atol: f64) -> f64 {
    let sum: f64 = (0..4)
        .map(|i| {
            let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / 4.0).sqrt()
}

fn initial_step(model: &Model, y0: &Vec4, f0: &Vec4, opts: &IntegrateOptions, stats: &mut SolverStats) -> f64 {
    let sc: Vec4 = std::array::from_fn(|i| opts.atol + opts.rtol * y0[i].abs());
    let norm = |v: &Vec4| ((0..4).map(|i| (v[i] / sc[i]).powi(2)).sum::<f64>() / 4.0).sqrt();
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec4 = std::array::from_fn(|i| y0[i] + h0 * f0[i]);
    let f1 = rhs(model, &y1, stats);
    let df: Vec4 = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&df) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1)
}

/// Integrates from `state0` at `t = 0` to `t_end`.
pub fn integrate(state0: &State, model: &Model, t_end: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    integrate_with(state0, model, t_end, opts, |_, _| {})
}

/// As [`integrate`], calling `emit(t, state)` for every output sample as it
/// is produced, so a caller can stream output that survives a later failure.
pub fn integrate_with<F: FnMut(f64, &State)>(
    state0: &State,
    model: &Model,
    t_end: f64,
    opts: &IntegrateOptions,
    mut emit: F,
) -> Result<Trajectory> {
    state0.check_finite()?;
    state0.check_nonnegative()?;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidHorizon(t_end));
    }
    opts.check(t_end)?;

    let mut stats = SolverStats::default();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut push = |t: f64, y: &Vec4, times: &mut Vec<f64>, states: &mut Vec<State>| {
        let s = State::from_array(*y);
        emit(t, &s);
        times.push(t);
        states.push(s);
    };
    let mut sampler = Sampler::new(&opts.sampling, t_end);

    let mut t = 0.0;
    let mut y = state0.to_array();
    let mut k1 = rhs(model, &y, &mut stats);
    match sampler.as_mut() {
        None => push(t, &y, &mut times, &mut states),
        Some(s) => {
            while s.next < s.times.len() && s.times[s.next] <= t {
                push(s.times[s.next], &y, &mut times, &mut states);
                s.next += 1;
            }
        }
    }

    let max_step = opts.max_step.unwrap_or(t_end);
    let mut h = opts
        .initial_step
        .unwrap_or_else(|| initial_step(model, &y, &k1, opts, &mut stats))
        .min(max_step);
    let mut last_rejected = false;

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::TooManySteps {
                t,
                max_steps: opts.max_steps,
            });
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let mut k = [[0.0; 4]; 7];
        k[0] = k1;
        for s in 1..7 {
            let ys: Vec4 = std::array::from_fn(|i| y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>());
            k[s] = rhs(model, &ys, &mut stats);
        }
        // stage 7 is evaluated at the fifth-order solution (first same as last)
        let y_new: Vec4 = std::array::from_fn(|i| y[i] + h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>());
        let err: Vec4 = std::array::from_fn(|i| h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>());
        let en = error_norm(&err, &y, &y_new, opts.rtol, opts.atol);

        if !en.is_finite() || en > 1.0 {
            stats.rejected += 1;
            let factor = if en.is_finite() {
                (SAFETY * en.powf(-0.2)).max(MIN_FACTOR)
            } else {
                MIN_FACTOR
            };
            h *= factor.min(1.0);
            last_rejected = true;
            continue;
        }

        let (worst, value) = y_new
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        if value < -10.0 * opts.atol {
            return Err(Error::NegativityViolation {
                t: t + h,
                component: State::COMPONENTS[worst],
                value,
            });
        }
        if value < -opts.atol {
            stats.rejected += 1;
            stats.negativity_rejections += 1;
            h *= 0.5;
            last_rejected = true;
            continue;
        }
        let mut y_acc = y_new;
        for v in y_acc.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
                stats.clipped += 1;
            }
        }
        let k7 = if y_acc == y_new {
            k[6]
        } else {
            rhs(model, &y_acc, &mut stats)
        };

        let t_new = if last { t_end } else { t + h };
        if let Some(s) = sampler.as_mut() {
            let ydiff: Vec4 = std::array::from_fn(|i| y_acc[i] - y[i]);
            let bspl: Vec4 = std::array::from_fn(|i| h * k[0][i] - ydiff[i]);
            let interp = Interpolant {
                t0: t,
                h,
                r: [
                    y,
                    ydiff,
                    bspl,
                    std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                    std::array::from_fn(|i| h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>()),
                ],
            };
            while s.next < s.times.len() && s.times[s.next] <= t_new {
                let ts = s.times[s.next];
                let ys = if ts == t_new {
                    y_acc
                } else {
                    interp
                        .eval(ts)
                        .map(|v| if v < 0.0 && v >= -opts.atol { 0.0 } else { v })
                };
                push(ts, &ys, &mut times, &mut states);
                s.next += 1;
            }
        }

        t = t_new;
        y = y_acc;
        k1 = k7;
        stats.accepted += 1;
        stats.final_step = h;
        if sampler.is_none() {
            push(t, &y, &mut times, &mut states);
        }

        let mut factor = (SAFETY * en.max(1e-10).powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR);
        if last_rejected {
            factor = factor.min(1.0);
        }
        last_rejected = false;
        h = (h * factor).min(max_step);
    }

    Ok(Trajectory { times, states, stats })
}
