//! Replicator dynamics of the two infinite populations.
//!
//! The system is written in the reduced coordinates `(x1, x2, x3, y)` with
//! `x4 = 1 - x1 - x2 - x3`. Each equation carries an `x_i (1 - x_i)` (or
//! `y (1 - y)`) prefactor in front of the payoff advantage over the
//! population mean ([`ReplicatorForm::Literal`]). The textbook form
//! `x_i (pi_i - mean)` is available as [`ReplicatorForm::Standard`].
//!
//! The literal form does not keep `x4` inside `[0, 1]` on its own, so the
//! integrator projects back onto the simplex after every step.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{CreatorStrategy, GameParams, UserStrategy};
use crate::payoff::{
    avg_cooperation, expected_creator_payoffs, expected_user_payoffs, PopulationState,
};

/// Which right-hand side to integrate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ReplicatorForm {
    /// `dx_i/dt = x_i (1 - x_i) [pi_i - mean]`, `dy/dt = y (1 - y) [pi_C - mean]`.
    #[default]
    Literal,
    /// `dx_i/dt = x_i [pi_i - mean]`, `dy/dt = y [pi_C - mean]`.
    Standard,
}

impl ReplicatorForm {
    pub fn as_str(self) -> &'static str {
        match self {
            ReplicatorForm::Literal => "literal",
            ReplicatorForm::Standard => "standard",
        }
    }

    /// Prefactor `g(v)` multiplying the payoff advantage.
    #[inline]
    pub(crate) fn gain(self, v: f64) -> f64 {
        match self {
            ReplicatorForm::Literal => v * (1.0 - v),
            ReplicatorForm::Standard => v,
        }
    }

    /// `g'(v)`.
    #[inline]
    pub(crate) fn gain_slope(self, v: f64) -> f64 {
        match self {
            ReplicatorForm::Literal => 1.0 - 2.0 * v,
            ReplicatorForm::Standard => 1.0,
        }
    }
}

impl std::str::FromStr for ReplicatorForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(ReplicatorForm::Literal),
            "standard" => Ok(ReplicatorForm::Standard),
            other => Err(Error::InvalidConfig(format!(
                "unknown replicator form `{other}` (expected literal or standard)"
            ))),
        }
    }
}

/// Right-hand side at reduced coordinates `z = (x1, x2, x3, y)`.
///
/// `z` need not lie on the simplex; Runge-Kutta stages evaluate slightly
/// outside it.
pub fn rhs(form: ReplicatorForm, z: &[f64; 4], p: &GameParams) -> [f64; 4] {
    let s = PopulationState {
        x: [z[0], z[1], z[2], 1.0 - z[0] - z[1] - z[2]],
        y: z[3],
    };
    let pi = expected_user_payoffs(&s, p);
    let mean_user: f64 = s.x.iter().zip(&pi).map(|(x, v)| x * v).sum();
    let [pi_d, pi_c] = expected_creator_payoffs(&s, p);
    let mean_creator = s.y * pi_c + (1.0 - s.y) * pi_d;
    [
        form.gain(z[0]) * (pi[0] - mean_user),
        form.gain(z[1]) * (pi[1] - mean_user),
        form.gain(z[2]) * (pi[2] - mean_user),
        form.gain(z[3]) * (pi_c - mean_creator),
    ]
}

/// `(dx1, dx2, dx3, dy)` of the literal system at a valid state.
pub fn derivatives(s: &PopulationState, p: &GameParams) -> [f64; 4] {
    rhs(ReplicatorForm::Literal, &s.reduced(), p)
}

/// Fixed-step integrator settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub step_size: f64,
    /// Total integration time.
    pub horizon: f64,
    /// A state is recorded every `record_stride` steps (and at the last step).
    pub record_stride: usize,
    /// Tolerance on the user simplex sum of recorded states.
    pub simplex_tolerance: f64,
    /// Max-norm of the derivatives below which a terminal state counts as converged.
    pub convergence_epsilon: f64,
    /// Max-norm distance to the all-defect corner below which a terminal
    /// state counts as having reached it.
    pub defection_tolerance: f64,
    pub form: ReplicatorForm,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            step_size: 0.01,
            horizon: 10_000.0,
            record_stride: 100,
            simplex_tolerance: 1e-9,
            convergence_epsilon: 1e-6,
            defection_tolerance: 1e-3,
            form: ReplicatorForm::Literal,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(self) -> Result<Self> {
        let h = self.step_size;
        if !(h.is_finite() && h > 0.0 && h <= 0.1) {
            return Err(Error::InvalidConfig(format!(
                "step_size {h} must lie in (0, 0.1]"
            )));
        }
        if !(self.horizon.is_finite() && self.horizon >= 100.0 * h) {
            return Err(Error::InvalidConfig(format!(
                "horizon {} must be at least 100 steps",
                self.horizon
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig("record_stride must be positive".into()));
        }
        for (name, v) in [
            ("simplex_tolerance", self.simplex_tolerance),
            ("convergence_epsilon", self.convergence_epsilon),
            ("defection_tolerance", self.defection_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        Ok(self)
    }

    /// Number of integration steps covering the horizon.
    pub fn steps(&self) -> usize {
        (self.horizon / self.step_size).round() as usize
    }
}

/// Recorded time series of one integration.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PopulationState>,
    pub eta_series: Vec<f64>,
    /// Largest per-step change applied by the simplex projection.
    pub max_projection_correction: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn terminal(&self) -> Option<&PopulationState> {
        self.states.last()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutcomeKind {
    ConvergedDefection,
    ConvergedOther,
    Oscillating,
}

impl OutcomeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::ConvergedDefection => "ConvergedDefection",
            OutcomeKind::ConvergedOther => "ConvergedOther",
            OutcomeKind::Oscillating => "Oscillating",
        }
    }
}

impl std::str::FromStr for OutcomeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ConvergedDefection" => Ok(OutcomeKind::ConvergedDefection),
            "ConvergedOther" => Ok(OutcomeKind::ConvergedOther),
            "Oscillating" => Ok(OutcomeKind::Oscillating),
            other => Err(Error::Malformed(format!("unknown outcome `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryOutcome {
    pub kind: OutcomeKind,
    /// Trapezoidal time average of `eta` over the final half of the run.
    pub time_averaged_eta: f64,
    pub terminal_state: PopulationState,
}

#[inline]
fn clip_unit(v: f64) -> f64 {
    if v < f64::MIN_POSITIVE {
        0.0
    } else {
        v.min(1.0)
    }
}

fn axpy(z: &[f64; 4], a: f64, k: &[f64; 4]) -> [f64; 4] {
    [
        z[0] + a * k[0],
        z[1] + a * k[1],
        z[2] + a * k[2],
        z[3] + a * k[3],
    ]
}

/// One classical fourth-order Runge-Kutta step, without projection.
pub fn rk4_step(form: ReplicatorForm, z: &[f64; 4], h: f64, p: &GameParams) -> [f64; 4] {
    let k1 = rhs(form, z, p);
    let k2 = rhs(form, &axpy(z, 0.5 * h, &k1), p);
    let k3 = rhs(form, &axpy(z, 0.5 * h, &k2), p);
    let k4 = rhs(form, &axpy(z, h, &k3), p);
    let mut out = *z;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Clips the user frequencies to `[0, 1]`, rescales them to sum to one and
/// clips `y`. Returns the projected state and the largest coordinate change.
///
/// Subnormal frequencies are flushed to zero.
pub fn project(z: &[f64; 4]) -> (PopulationState, f64) {
    let raw = [z[0], z[1], z[2], 1.0 - z[0] - z[1] - z[2]];
    let clipped = raw.map(clip_unit);
    let sum: f64 = clipped.iter().sum();
    let x = clipped.map(|v| v / sum);
    let y = clip_unit(z[3]);
    let correction = raw
        .iter()
        .zip(&x)
        .map(|(a, b)| (a - b).abs())
        .fold((z[3] - y).abs(), f64::max);
    (PopulationState { x, y }, correction)
}

/// Integrates from `s0` over the configured horizon, recording every
/// `record_stride` steps.
pub fn integrate(
    s0: &PopulationState,
    p: &GameParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    s0.check(cfg.simplex_tolerance)?;
    let n = cfg.steps();
    let h = cfg.step_size;
    let capacity = n / cfg.record_stride + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        eta_series: Vec::with_capacity(capacity),
        max_projection_correction: 0.0,
    };
    let record = |traj: &mut Trajectory, i: usize, s: PopulationState| {
        traj.times.push(i as f64 * h);
        traj.eta_series.push(avg_cooperation(&s, p));
        traj.states.push(s);
    };

    let mut state = *s0;
    record(&mut traj, 0, state);
    for i in 1..=n {
        let z = rk4_step(cfg.form, &state.reduced(), h, p);
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: i });
        }
        let (next, correction) = project(&z);
        traj.max_projection_correction = traj.max_projection_correction.max(correction);
        state = next;
        if i % cfg.record_stride == 0 || i == n {
            record(&mut traj, i, state);
        }
    }
    Ok(traj)
}

fn trapezoid_mean(times: &[f64], values: &[f64]) -> f64 {
    if times.len() < 2 {
        return values.first().copied().unwrap_or(0.0);
    }
    let span = times[times.len() - 1] - times[0];
    let area: f64 = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum();
    area / span
}

fn classify_terminal(
    terminal: &PopulationState,
    p: &GameParams,
    cfg: &IntegratorConfig,
) -> OutcomeKind {
    let defection = PopulationState::corner(UserStrategy::AllD, CreatorStrategy::Unsafe);
    if terminal.max_distance(&defection) < cfg.defection_tolerance {
        return OutcomeKind::ConvergedDefection;
    }
    let speed = rhs(cfg.form, &terminal.reduced(), p)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if speed < cfg.convergence_epsilon {
        OutcomeKind::ConvergedOther
    } else {
        OutcomeKind::Oscillating
    }
}

/// Classifies a recorded trajectory by its terminal state and averages
/// `eta` over its final half.
pub fn classify_outcome(
    t: &Trajectory,
    p: &GameParams,
    cfg: &IntegratorConfig,
) -> Result<TrajectoryOutcome> {
    if t.len() < 2 {
        return Err(Error::TrajectoryTooShort(t.len()));
    }
    let t0 = t.times[0];
    let t_end = t.times[t.len() - 1];
    let start = t0 + 0.5 * (t_end - t0);
    let first = t
        .times
        .iter()
        .position(|&ti| ti >= start - 1e-9 * t_end.abs().max(1.0))
        .unwrap_or(t.len() - 1)
        .min(t.len() - 2);
    let time_averaged_eta = trapezoid_mean(&t.times[first..], &t.eta_series[first..]);
    let terminal_state = t.states[t.len() - 1];
    Ok(TrajectoryOutcome {
        kind: classify_terminal(&terminal_state, p, cfg),
        time_averaged_eta: time_averaged_eta.clamp(0.0, 1.0),
        terminal_state,
    })
}

/// Integrates without recording and returns the outcome directly.
///
/// Equivalent to `classify_outcome(&integrate(..)?)` with `record_stride = 1`.
pub fn run_outcome(
    s0: &PopulationState,
    p: &GameParams,
    cfg: &IntegratorConfig,
) -> Result<TrajectoryOutcome> {
    s0.check(cfg.simplex_tolerance)?;
    let n = cfg.steps();
    let h = cfg.step_size;
    let window_start = n.div_ceil(2);

    let mut state = *s0;
    let mut eta_prev = avg_cooperation(&state, p);
    let mut area = 0.0;
    let mut i = 1;
    while i <= n {
        let z = rk4_step(cfg.form, &state.reduced(), h, p);
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: i });
        }
        let (next, _) = project(&z);
        let eta = avg_cooperation(&next, p);
        if i > window_start {
            area += 0.5 * h * (eta_prev + eta);
        }
        if next == state {
            // Exact fixed point of the discrete map: the rest of the run is constant.
            let remaining = n - i;
            let from = window_start.max(i);
            area += (n - from).min(remaining) as f64 * h * eta;
            break;
        }
        state = next;
        eta_prev = eta;
        i += 1;
    }
    let span = (n - window_start) as f64 * h;
    let time_averaged_eta = if span > 0.0 { area / span } else { eta_prev };
    Ok(TrajectoryOutcome {
        kind: classify_terminal(&state, p, cfg),
        time_averaged_eta: time_averaged_eta.clamp(0.0, 1.0),
        terminal_state: state,
    })
}

/// One starting state of a basin census and where it ended up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CensusEntry {
    pub state_id: usize,
    pub start: PopulationState,
    /// `None` when the integration failed.
    pub outcome: Option<(OutcomeKind, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasinCensus {
    pub total_states: usize,
    /// Starting states whose integration failed; excluded from the statistics.
    pub failed: usize,
    pub defection_fraction: f64,
    pub mean_eta: f64,
    pub grid_step: f64,
    pub entries: Vec<CensusEntry>,
}

/// Number of grid intervals per unit for `grid_step`, if it divides 1.
pub fn grid_divisions(grid_step: f64) -> Result<usize> {
    if !(grid_step.is_finite() && grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "grid step {grid_step} must lie in (0, 1]"
        )));
    }
    let m = (1.0 / grid_step).round();
    if (m * grid_step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "grid step {grid_step} does not divide 1"
        )));
    }
    Ok(m as usize)
}

/// All census starting states: every user composition on the grid crossed
/// with every creator share on the grid, users major.
pub fn census_grid(grid_step: f64) -> Result<Vec<PopulationState>> {
    let m = grid_divisions(grid_step)?;
    let scale = m as f64;
    let mut out = Vec::new();
    for k1 in 0..=m {
        for k2 in 0..=(m - k1) {
            for k3 in 0..=(m - k1 - k2) {
                let k4 = m - k1 - k2 - k3;
                let x = [k1, k2, k3, k4].map(|k| k as f64 / scale);
                for j in 0..=m {
                    out.push(PopulationState {
                        x,
                        y: j as f64 / scale,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Integrates every grid starting state and reports the share that reaches
/// the all-defect corner and the mean time-averaged `eta`.
///
/// Runs on the current rayon pool; the result does not depend on its size.
pub fn basin_census(p: &GameParams, grid_step: f64, cfg: &IntegratorConfig) -> Result<BasinCensus> {
    let p = p.validate()?;
    let cfg = cfg.validate()?;
    let starts = census_grid(grid_step)?;
    let entries: Vec<CensusEntry> = starts
        .par_iter()
        .enumerate()
        .map(|(state_id, start)| {
            let outcome = match run_outcome(start, &p, &cfg) {
                Ok(o) => Some((o.kind, o.time_averaged_eta)),
                Err(e) => {
                    log::warn!("census state {state_id} failed: {e}");
                    None
                }
            };
            CensusEntry {
                state_id,
                start: *start,
                outcome,
            }
        })
        .collect();
    Ok(summarize_census(entries, grid_step))
}

pub(crate) fn summarize_census(entries: Vec<CensusEntry>, grid_step: f64) -> BasinCensus {
    let mut valid = 0usize;
    let mut defected = 0usize;
    let mut eta_sum = 0.0;
    for e in &entries {
        if let Some((kind, eta)) = e.outcome {
            valid += 1;
            eta_sum += eta;
            if kind == OutcomeKind::ConvergedDefection {
                defected += 1;
            }
        }
    }
    let denom = valid.max(1) as f64;
    BasinCensus {
        total_states: entries.len(),
        failed: entries.len() - valid,
        defection_fraction: defected as f64 / denom,
        mean_eta: eta_sum / denom,
        grid_step,
        entries,
    }
}

/// Time-averaged `eta` from `s0` for each parameter set, in input order.
pub fn time_averaged_eta_grid(
    p_grid: &[GameParams],
    s0: &PopulationState,
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    let cfg = cfg.validate()?;
    p_grid
        .par_iter()
        .map(|p| {
            let p = p.validate()?;
            run_outcome(s0, &p, &cfg).map(|o| o.time_averaged_eta)
        })
        .collect()
}
