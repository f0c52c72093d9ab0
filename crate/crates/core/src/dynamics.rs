//! Time integration and limit-cycle classification.

use serde::Serialize;

use crate::control::ControlVariant;
use crate::error::{ModelError, Result};
use crate::model::{rhs, VolumeState};
use crate::params::CardioParams;

pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.5;

/// Largest component-wise gap allowed between a dt run and a dt/2 run over
/// the first 1% of the horizon.
pub const STEP_CHECK_LIMIT: f64 = 1e-6;

/// Peak-to-trough amplitude of `v_sa` above which a steady oscillation
/// counts as sustained, litres.
pub const SUSTAINED_MIN_AMPLITUDE: f64 = 1e-4;
/// Final cycle amplitude below which a shrinking oscillation counts as
/// decayed, litres.
pub const DECAYED_AMPLITUDE: f64 = 1e-5;
/// Relative spread allowed among the last five cycle amplitudes.
pub const STEADINESS: f64 = 0.01;
pub const MIN_PEAKS: usize = 6;
/// Cycle amplitudes below this are treated as rounding noise (about 5·10⁴
/// ulps at one litre) and end the monotonic-decay check.
pub const RESOLUTION_FLOOR: f64 = 1e-11;

/// Uniformly sampled solution; `times[i] = i·dt` in minutes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<VolumeState>,
    pub dt: f64,
    pub t_end: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&VolumeState> {
        self.states.last()
    }

    /// Largest distance of any sample from `point` (max-norm).
    pub fn max_deviation_from(&self, point: &VolumeState) -> f64 {
        self.states
            .iter()
            .map(|s| s.max_abs_diff(point))
            .fold(0.0, f64::max)
    }
}

/// One classic fourth-order Runge-Kutta step.
pub fn rk4_step(
    params: &CardioParams,
    variant: &ControlVariant,
    mu: f64,
    state: &VolumeState,
    dt: f64,
) -> Result<VolumeState> {
    let x = state.to_array();
    let f = |y: [f64; 3]| rhs(params, variant, mu, &VolumeState::from_array(y)).map(|d| d.to_array());
    let axpy = |a: f64, k: [f64; 3]| [x[0] + a * k[0], x[1] + a * k[1], x[2] + a * k[2]];

    let k1 = f(x)?;
    let k2 = f(axpy(0.5 * dt, k1))?;
    let k3 = f(axpy(0.5 * dt, k2))?;
    let k4 = f(axpy(dt, k3))?;
    Ok(VolumeState::from_array([0, 1, 2].map(|i| {
        x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    })))
}

fn steps_for(t_end: f64, dt: f64) -> usize {
    // Guard against t_end/dt landing a rounding error below an integer.
    ((t_end / dt) * (1.0 + 1e-12)).floor() as usize
}

fn advance(
    params: &CardioParams,
    variant: &ControlVariant,
    mu: f64,
    initial: VolumeState,
    dt: f64,
    steps: usize,
    mut sink: impl FnMut(VolumeState),
) -> Result<VolumeState> {
    let mut x = initial;
    for i in 0..steps {
        let t = (i + 1) as f64 * dt;
        x = rk4_step(params, variant, mu, &x, dt).map_err(|_| ModelError::LeftDomain { t })?;
        if !x.is_admissible(params) {
            return Err(ModelError::LeftDomain { t });
        }
        sink(x);
    }
    Ok(x)
}

/// Discrepancy between a `dt` run and a `dt/2` run over the first 1% of
/// the horizon (at least one step).
pub fn step_check(
    params: &CardioParams,
    variant: &ControlVariant,
    mu: f64,
    initial: VolumeState,
    dt: f64,
    t_end: f64,
) -> Result<f64> {
    let n = ((0.01 * t_end / dt).round() as usize).max(1);
    let coarse = advance(params, variant, mu, initial, dt, n, |_| {})?;
    let fine = advance(params, variant, mu, initial, 0.5 * dt, 2 * n, |_| {})?;
    Ok(coarse.max_abs_diff(&fine))
}

/// Fixed-step RK4 from `initial` over `[0, t_end]`.
///
/// Produces `floor(t_end/dt) + 1` samples. The step is rejected up front if
/// halving it changes the early solution by more than [`STEP_CHECK_LIMIT`].
pub fn integrate(
    params: &CardioParams,
    variant: &ControlVariant,
    mu: f64,
    initial: VolumeState,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ModelError::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    if !(t_end >= 100.0 * dt) || !t_end.is_finite() {
        return Err(ModelError::InvalidArgument(format!(
            "t_end = {t_end} must be at least 100·dt = {}",
            100.0 * dt
        )));
    }
    if !initial.is_admissible(params) {
        return Err(ModelError::Domain(format!(
            "initial state {initial:?} is outside the admissible domain"
        )));
    }

    let discrepancy = step_check(params, variant, mu, initial, dt, t_end)?;
    if discrepancy > STEP_CHECK_LIMIT {
        return Err(ModelError::StepTooCoarse {
            dt,
            discrepancy,
            limit: STEP_CHECK_LIMIT,
        });
    }

    let n = steps_for(t_end, dt);
    let mut states = Vec::with_capacity(n + 1);
    states.push(initial);
    advance(params, variant, mu, initial, dt, n, |x| states.push(x))?;
    let times = (0..=n).map(|i| i as f64 * dt).collect();
    Ok(Trajectory {
        times,
        states,
        dt,
        t_end,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CycleClass {
    Decaying,
    Sustained,
    Inconclusive,
}

impl CycleClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CycleClass::Decaying => "decaying",
            CycleClass::Sustained => "sustained",
            CycleClass::Inconclusive => "inconclusive",
        }
    }
}

/// Oscillation summary of `v_sa` after the transient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub classification: CycleClass,
    /// Peak-to-trough range of `v_sa` over the analysis window, litres.
    pub amplitude: f64,
    /// Mean peak spacing in seconds, if at least two peaks were found.
    pub period_s: Option<f64>,
    /// Peak times in minutes, refined by a parabola through each maximum.
    pub peak_times: Vec<f64>,
    /// Drop from each peak to the lowest point before the next peak.
    pub cycle_amplitudes: Vec<f64>,
}

/// Classifies the trajectory after discarding its leading
/// `transient_fraction`.
///
/// The window should span about twenty periods or more; shorter windows
/// tend to come back inconclusive.
pub fn detect_cycle(traj: &Trajectory, transient_fraction: f64) -> Result<CycleReport> {
    if !(0.0..1.0).contains(&transient_fraction) {
        return Err(ModelError::InvalidArgument(format!(
            "transient fraction {transient_fraction} must lie in [0, 1)"
        )));
    }
    let start = (traj.len() as f64 * transient_fraction).floor() as usize;
    let window: Vec<f64> = traj.states[start.min(traj.len())..]
        .iter()
        .map(|s| s.v_sa)
        .collect();
    if window.len() < 3 {
        return Err(ModelError::TrajectoryTooShort(window.len()));
    }
    let times = &traj.times[start..];

    let (lo, hi) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let amplitude = hi - lo;

    let peaks: Vec<usize> = (1..window.len() - 1)
        .filter(|&i| window[i] > window[i - 1] && window[i] > window[i + 1])
        .collect();

    let peak_times: Vec<f64> = peaks
        .iter()
        .map(|&i| {
            let (y0, y1, y2) = (window[i - 1], window[i], window[i + 1]);
            let denom = y0 - 2.0 * y1 + y2;
            let offset = if denom < 0.0 { 0.5 * (y0 - y2) / denom } else { 0.0 };
            times[i] + offset * traj.dt
        })
        .collect();

    let cycle_amplitudes: Vec<f64> = peaks
        .windows(2)
        .map(|w| {
            let trough = window[w[0]..=w[1]].iter().copied().fold(f64::INFINITY, f64::min);
            window[w[0]] - trough
        })
        .collect();

    let period_s = (peak_times.len() >= 2).then(|| {
        let span = peak_times[peak_times.len() - 1] - peak_times[0];
        60.0 * span / (peak_times.len() - 1) as f64
    });

    let classification = classify(peaks.len(), amplitude, &cycle_amplitudes);
    Ok(CycleReport {
        classification,
        amplitude,
        period_s,
        peak_times,
        cycle_amplitudes,
    })
}

fn classify(peak_count: usize, amplitude: f64, cycles: &[f64]) -> CycleClass {
    if peak_count < MIN_PEAKS || cycles.len() < 5 {
        return CycleClass::Inconclusive;
    }
    let last5 = &cycles[cycles.len() - 5..];
    let mean = last5.iter().sum::<f64>() / 5.0;
    let steady = last5.iter().all(|a| (a - mean).abs() <= STEADINESS * mean);
    if amplitude > SUSTAINED_MIN_AMPLITUDE && steady {
        return CycleClass::Sustained;
    }

    let resolved = cycles.iter().take_while(|&&a| a >= RESOLUTION_FLOOR).count();
    let shrinking = cycles[..resolved].windows(2).all(|w| w[1] < w[0]);
    let final_amplitude = cycles[cycles.len() - 1];
    if shrinking && final_amplitude < DECAYED_AMPLITUDE {
        return CycleClass::Decaying;
    }
    CycleClass::Inconclusive
}
