//! Steady-state and oscillation diagnostics on the trailing part of a
//! trajectory.

use serde::Serialize;

use super::Trajectory;
use crate::model::{Model, State};

/// A strict local maximum counts as a peak only if it rises this far above
/// the window minimum.
pub const PEAK_NOISE_FLOOR: f64 = 1e-10;

/// A component is flagged only if its peak-to-trough range in the window
/// exceeds `MIN_CYCLE_AMPLITUDE * (1 + |window mean|)`. A weakly damped focus
/// settles onto a wiggle proportional to the solver tolerance (about 1e-6 at
/// the default rtol), which must not read as a cycle.
pub const MIN_CYCLE_AMPLITUDE: f64 = 1e-5;

/// Relative amplitude change over the window below which the trend counts as
/// sustained.
pub const TREND_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyState {
    /// Terminal state, present iff the run is judged converged.
    pub state: Option<State>,
    /// Trajectory spans less than two windows.
    pub too_short: bool,
    /// Max over components of (max - min) in the trailing window.
    pub variation: f64,
    /// `|rhs(terminal)|_inf`.
    pub rhs_norm: f64,
}

fn trailing(traj: &Trajectory, window: f64) -> (&[f64], &[State]) {
    let t_last = traj.times.last().copied().unwrap_or(0.0);
    let start = traj.times.partition_point(|&t| t < t_last - window);
    (&traj.times[start..], &traj.states[start..])
}

pub fn detect_steady_state(traj: &Trajectory, model: &Model, window: f64, tol: f64) -> SteadyState {
    let Some((_, terminal)) = traj.last() else {
        return SteadyState {
            state: None,
            too_short: true,
            variation: f64::NAN,
            rhs_norm: f64::NAN,
        };
    };
    let too_short = traj.span() < 2.0 * window;
    let (_, states) = trailing(traj, window);
    let variation = (0..4)
        .map(|c| {
            let (lo, hi) = states
                .iter()
                .map(|s| s.to_array()[c])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            hi - lo
        })
        .fold(0.0, f64::max);
    let rhs_norm = model
        .rhs_array(&terminal.to_array())
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let converged = !too_short && variation < tol && rhs_norm < tol;
    SteadyState {
        state: converged.then_some(terminal),
        too_short,
        variation,
        rhs_norm,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trend {
    Growing,
    Decaying,
    Sustained,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentOscillation {
    pub peaks: usize,
    /// Mean spacing between consecutive peaks.
    pub mean_period: Option<f64>,
    /// From a least-squares line through the peak amplitudes; needs two peaks.
    pub trend: Option<Trend>,
    /// Fitted amplitude change over the peak span, relative to the mean amplitude.
    pub relative_change: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationReport {
    pub oscillating: bool,
    pub too_short: bool,
    /// In `S1, I1, S2, I2` order.
    pub components: Vec<ComponentOscillation>,
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn component_oscillation(times: &[f64], values: &[f64]) -> ComponentOscillation {
    let floor = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    let mut peak_t = Vec::new();
    let mut peak_amp = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let v = values[i];
        if v > values[i - 1] && v > values[i + 1] && v - floor > PEAK_NOISE_FLOOR {
            peak_t.push(times[i]);
            peak_amp.push(v - mean);
        }
    }
    let peaks = peak_t.len();
    let mean_period = (peaks >= 2).then(|| (peak_t[peaks - 1] - peak_t[0]) / (peaks - 1) as f64);
    let relative_change = (peaks >= 2).then(|| {
        let slope = least_squares_slope(&peak_t, &peak_amp);
        let mean_amp = peak_amp.iter().sum::<f64>() / peaks as f64;
        let span = peak_t[peaks - 1] - peak_t[0];
        if mean_amp.abs() > 0.0 {
            slope * span / mean_amp.abs()
        } else {
            0.0
        }
    });
    let trend = relative_change.map(|r| {
        if r < -TREND_TOL {
            Trend::Decaying
        } else if r > TREND_TOL {
            Trend::Growing
        } else {
            Trend::Sustained
        }
    });
    let range = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) - floor;
    let flagged = peaks >= 4 && trend != Some(Trend::Decaying) && range > MIN_CYCLE_AMPLITUDE * (1.0 + mean.abs());
    ComponentOscillation {
        peaks,
        mean_period,
        trend,
        relative_change,
        flagged,
    }
}

pub fn detect_oscillation(traj: &Trajectory, window: f64) -> OscillationReport {
    let too_short = traj.span() < window;
    let (times, states) = trailing(traj, window);
    let components: Vec<ComponentOscillation> = (0..4)
        .map(|c| {
            let values: Vec<f64> = states.iter().map(|s| s.to_array()[c]).collect();
            component_oscillation(times, &values)
        })
        .collect();
    OscillationReport {
        oscillating: !too_short && components.iter().any(|c| c.flagged),
        too_short,
        components,
    }
}
