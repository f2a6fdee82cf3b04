//! Fixed-step RK4 simulation of the filtered closed loop and open-loop replay.

use std::f64::consts::PI;

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::hocbf::{self, SafetySpec};
use crate::material::strain_energy;
use crate::safety_filter::{filter_scalar, filter_scalar_bounded, InputBounds, ZERO_ROW};
use crate::tube::{StretchState, TubeModel};

/// Piecewise-linear pressure history.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureProfile {
    times: Vec<f64>,
    pressures: Vec<f64>,
}

impl PressureProfile {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain("pressure profile needs at least two samples".into()));
        }
        if samples.iter().any(|(t, p)| !(t.is_finite() && p.is_finite())) {
            return Err(Error::Domain("pressure samples must be finite".into()));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::Domain(format!(
                    "pressure sample times must be strictly increasing (rows {} and {})",
                    i,
                    i + 1
                )));
            }
        }
        Ok(PressureProfile {
            times: samples.iter().map(|s| s.0).collect(),
            pressures: samples.iter().map(|s| s.1).collect(),
        })
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("profile is non-empty")
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.pressures.iter().copied())
    }

    /// Linear interpolation. Times outside the sampled span are clamped to
    /// the end values; [`PressureProfile::covers`] is checked up front.
    pub fn at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return self.pressures[0];
        }
        if k == self.times.len() {
            return *self.pressures.last().expect("profile is non-empty");
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (p0, p1) = (self.pressures[k - 1], self.pressures[k]);
        if p0 == p1 {
            return p0;
        }
        p0 + (p1 - p0) * ((t - t0) / (t1 - t0))
    }

    /// Sample times strictly inside `(t0, t1)`.
    pub fn knots_within(&self, t0: f64, t1: f64) -> &[f64] {
        let lo = self.times.partition_point(|&x| x <= t0);
        let hi = self.times.partition_point(|&x| x < t1);
        &self.times[lo..hi.max(lo)]
    }

    pub fn covers(&self, t_start: f64, t_end: f64) -> bool {
        let slack = 1e-12 * t_end.abs().max(1.0);
        self.start() <= t_start + slack && self.end() >= t_end - slack
    }
}

/// Nominal (unfiltered) pressure command.
#[derive(Debug, Clone, PartialEq)]
pub enum NominalControl {
    /// `amplitude·sin(2π·frequency·t)` for `t < cutoff`, then zero.
    HalfSinusoid {
        amplitude: f64,
        frequency: f64,
        cutoff: f64,
    },
    Constant {
        pressure: f64,
    },
    Replay(PressureProfile),
}

impl Default for NominalControl {
    fn default() -> Self {
        NominalControl::HalfSinusoid {
            amplitude: 10_000.0,
            frequency: 1.0,
            cutoff: 0.5,
        }
    }
}

impl NominalControl {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            NominalControl::HalfSinusoid {
                amplitude,
                frequency,
                cutoff,
            } => {
                if t < *cutoff {
                    amplitude * (2.0 * PI * frequency * t).sin()
                } else {
                    0.0
                }
            }
            NominalControl::Constant { pressure } => *pressure,
            NominalControl::Replay(profile) => profile.at(t),
        }
    }
}

/// When the safety filter is evaluated inside an RK4 step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlUpdate {
    /// Feedback evaluated at every RK4 stage, and a step that crosses a
    /// filter activation or release is split at the crossing. Each piece has
    /// a smooth right-hand side, so the closed loop keeps fourth order.
    #[default]
    SwitchLocated,
    /// Feedback evaluated at every RK4 stage without locating switches.
    /// Fourth order between switches, lower across them.
    PerStage,
    /// Feedback evaluated once per step and held. First-order in `dt`.
    ZeroOrderHold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub t_end: f64,
    pub dt: f64,
    pub initial_state: StretchState,
    pub nominal: NominalControl,
    pub filter_enabled: bool,
    /// Log every `log_stride`-th step.
    pub log_stride: usize,
    pub control_update: ControlUpdate,
    pub input_bounds: Option<InputBounds>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            t_end: 1.0,
            dt: 1e-4,
            initial_state: StretchState::REST,
            nominal: NominalControl::default(),
            filter_enabled: true,
            log_stride: 1,
            control_update: ControlUpdate::SwitchLocated,
            input_bounds: None,
        }
    }
}

impl SimulationConfig {
    /// Number of RK4 steps; `t_end` must be an integer multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0 && self.t_end.is_finite() && self.dt < self.t_end) {
            return Err(Error::Domain(format!(
                "need 0 < dt < t_end, got dt = {} and t_end = {}",
                self.dt, self.t_end
            )));
        }
        let n = (self.t_end / self.dt).round();
        if ((n * self.dt - self.t_end) / self.t_end).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "t_end = {} is not a whole number of steps of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.steps()?;
        if self.log_stride == 0 {
            return Err(Error::Domain("log stride must be >= 1".into()));
        }
        if let NominalControl::Replay(profile) = &self.nominal {
            if !profile.covers(0.0, self.t_end) {
                return Err(Error::Domain(format!(
                    "pressure history spans [{}, {}] but the run needs [0, {}]",
                    profile.start(),
                    profile.end(),
                    self.t_end
                )));
            }
        }
        if let NominalControl::HalfSinusoid {
            amplitude,
            frequency,
            cutoff,
        } = self.nominal
        {
            if !(amplitude.is_finite() && frequency.is_finite() && cutoff.is_finite()) {
                return Err(Error::Domain("nominal profile parameters must be finite".into()));
            }
        }
        Ok(())
    }
}

/// One logged sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub lambda_theta: f64,
    pub lambda_z: f64,
    pub dlambda_theta: f64,
    pub dlambda_z: f64,
    pub u_nom: f64,
    pub u_safe: f64,
    pub h: f64,
    pub psi1: f64,
    pub w: f64,
    pub active: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulationTrace {
    pub rows: Vec<TraceRow>,
    /// Applied pressure `(t, u)` at every step start and stage midpoint, undecimated.
    pub pressure: Vec<(f64, f64)>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn min_h(&self) -> f64 {
        self.rows.iter().map(|r| r.h).fold(f64::INFINITY, f64::min)
    }

    pub fn column(&self, f: impl Fn(&TraceRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Logged `(t, u_safe)` at the trace rows.
    pub fn logged_pressure(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.t, r.u_safe)).collect()
    }

    /// Index ranges `[start, end)` of consecutive rows with an active filter.
    pub fn active_intervals(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, r) in self.rows.iter().enumerate() {
            match (r.active, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    out.push((s, i));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, self.rows.len()));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FaultKind {
    #[error("state left the admissible domain: {0}")]
    Integration(String),
    #[error("{0}")]
    Filter(Error),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// A failed run. The rows logged before the fault are kept for diagnosis.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("simulation fault at t = {time}: {kind}")]
pub struct SimulationError {
    pub time: f64,
    pub kind: FaultKind,
    pub partial: SimulationTrace,
}

/// Classical RK4 step of `ẋ = f(t, x)`.
pub fn rk4<F>(t: f64, x: &Vector4<f64>, dt: f64, mut f: F) -> Result<Vector4<f64>>
where
    F: FnMut(f64, &Vector4<f64>) -> Result<Vector4<f64>>,
{
    let half = 0.5 * dt;
    let k1 = f(t, x)?;
    let k2 = f(t + half, &(x + k1 * half))?;
    let k3 = f(t + half, &(x + k2 * half))?;
    let k4 = f(t + dt, &(x + k3 * dt))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// One RK4 step of the tube dynamics with `u` held over the step.
pub fn rk4_step(model: &TubeModel, state: &StretchState, u: f64, dt: f64) -> Result<StretchState> {
    let next = rk4(0.0, &state.to_vector(), dt, |_, x| {
        let st = StretchState::from_vector(x)?;
        Ok(model.state_derivative(&st, u))
    })?;
    StretchState::from_vector(&next)
}

/// One RK4 step with the input recomputed from `(t, state)` at every stage.
pub fn rk4_step_feedback<C>(
    model: &TubeModel,
    state: &StretchState,
    t: f64,
    dt: f64,
    mut control: C,
) -> Result<StretchState>
where
    C: FnMut(f64, &StretchState) -> Result<f64>,
{
    let next = rk4(t, &state.to_vector(), dt, |tau, x| {
        let st = StretchState::from_vector(x)?;
        let u = control(tau, &st)?;
        Ok(model.state_derivative(&st, u))
    })?;
    StretchState::from_vector(&next)
}

struct Controller<'a> {
    cfg: &'a SimulationConfig,
    spec: &'a SafetySpec,
    model: &'a TubeModel,
}

/// Which branch of the projection is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Nominal,
    Boundary,
}

/// Resolution of the exported pressure history. The activation transient
/// spans only a few steps, so replay needs sub-step samples.
const PRESSURE_SAMPLES_PER_STEP: usize = 16;

/// Bisection depth for switch location; resolves the crossing to ~1e-14·dt.
const SWITCH_BISECTIONS: usize = 48;

struct Decision {
    u_nom: f64,
    u_safe: f64,
    active: bool,
    h: f64,
    psi1: f64,
}

impl Controller<'_> {
    fn decide(&self, t: f64, st: &StretchState) -> Result<Decision> {
        let u_nom = self.cfg.nominal.at(t);
        let eval = hocbf::evaluate(self.spec, self.model, st);
        if !self.cfg.filter_enabled {
            return Ok(Decision {
                u_nom,
                u_safe: u_nom,
                active: false,
                h: eval.h,
                psi1: eval.psi1,
            });
        }
        let result = match self.cfg.input_bounds {
            Some(bounds) => filter_scalar_bounded(u_nom, eval.a_coeff, eval.b_coeff, bounds)?,
            None => filter_scalar(u_nom, eval.a_coeff, eval.b_coeff)?,
        };
        Ok(Decision {
            u_nom,
            u_safe: result.u_safe,
            active: result.active,
            h: eval.h,
            psi1: eval.psi1,
        })
    }

    fn input(&self, t: f64, st: &StretchState) -> Result<f64> {
        if !self.cfg.filter_enabled {
            return Ok(self.cfg.nominal.at(t));
        }
        Ok(self.decide(t, st)?.u_safe)
    }

    fn branch(&self, t: f64, st: &StretchState) -> Result<Branch> {
        let u_nom = self.cfg.nominal.at(t);
        let eval = hocbf::evaluate(self.spec, self.model, st);
        Ok(if filter_scalar(u_nom, eval.a_coeff, eval.b_coeff)?.active {
            Branch::Boundary
        } else {
            Branch::Nominal
        })
    }

    /// Input of one branch, continued smoothly past its switching surface.
    fn branch_input(&self, branch: Branch, t: f64, st: &StretchState) -> Result<f64> {
        let u_nom = self.cfg.nominal.at(t);
        let eval = hocbf::evaluate(self.spec, self.model, st);
        if eval.a_coeff.abs() < ZERO_ROW {
            return Ok(filter_scalar(u_nom, eval.a_coeff, eval.b_coeff)?.u_safe);
        }
        Ok(match branch {
            Branch::Nominal => u_nom,
            Branch::Boundary => eval.b_coeff / eval.a_coeff,
        })
    }

    /// Appends the applied pressure at [`PRESSURE_SAMPLES_PER_STEP`] points of
    /// a step `x0 → x1`, states taken from cubic Hermite dense output.
    /// Sub-steps too short to advance `t` in floating point are skipped.
    fn record(
        &self,
        applied: &mut Vec<(f64, f64)>,
        t: f64,
        dt: f64,
        x0: &StretchState,
        x1: &StretchState,
    ) -> Result<()> {
        let u0 = self.input(t, x0)?;
        let f0 = self.model.state_derivative(x0, u0) * dt;
        let f1 = self.model.state_derivative(x1, self.input(t + dt, x1)?) * dt;
        let (v0, v1) = (x0.to_vector(), x1.to_vector());
        for j in 0..PRESSURE_SAMPLES_PER_STEP {
            let s = j as f64 / PRESSURE_SAMPLES_PER_STEP as f64;
            let tau = t + s * dt;
            if applied.last().is_some_and(|&(last, _)| tau <= last) {
                continue;
            }
            let u = if j == 0 {
                u0
            } else {
                let (s2, s3) = (s * s, s * s * s);
                let x = v0 * (2.0 * s3 - 3.0 * s2 + 1.0)
                    + f0 * (s3 - 2.0 * s2 + s)
                    + v1 * (3.0 * s2 - 2.0 * s3)
                    + f1 * (s3 - s2);
                self.input(tau, &StretchState::from_vector(&x)?)?
            };
            applied.push((tau, u));
        }
        Ok(())
    }

    fn located_step(&self, st: &StretchState, t: f64, dt: f64, applied: &mut Vec<(f64, f64)>) -> Result<StretchState> {
        let advance = |branch: Branch, t0: f64, s: &StretchState, h: f64| {
            rk4_step_feedback(self.model, s, t0, h, |tau, x| self.branch_input(branch, tau, x))
        };
        let first = self.branch(t, st)?;
        let full = advance(first, t, st, dt)?;
        let second = self.branch(t + dt, &full)?;
        if second == first {
            self.record(applied, t, dt, st, &full)?;
            return Ok(full);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..SWITCH_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let s = advance(first, t, st, mid * dt)?;
            if self.branch(t + mid * dt, &s)? == first {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let at_switch = advance(first, t, st, hi * dt)?;
        let next = advance(second, t + hi * dt, &at_switch, (1.0 - hi) * dt)?;
        self.record(applied, t, hi * dt, st, &at_switch)?;
        self.record(applied, t + hi * dt, (1.0 - hi) * dt, &at_switch, &next)?;
        Ok(next)
    }
}

/// Open-loop step that restarts RK4 at every profile knot inside the step, so
/// the input is linear within each sub-step.
fn knot_aligned_step(
    model: &TubeModel,
    st: &StretchState,
    t: f64,
    dt: f64,
    profile: &PressureProfile,
) -> Result<StretchState> {
    let margin = 1e-9 * dt;
    let end = t + dt;
    let mut from = t;
    let mut state = *st;
    for &knot in profile.knots_within(t + margin, end - margin) {
        state = rk4_step_feedback(model, &state, from, knot - from, |tau, _| Ok(profile.at(tau)))?;
        from = knot;
    }
    let rest = if from == t { dt } else { end - from };
    rk4_step_feedback(model, &state, from, rest, |tau, _| Ok(profile.at(tau)))
}

fn classify(err: Error) -> FaultKind {
    match err {
        Error::Infeasible { .. } => FaultKind::Filter(err),
        Error::Domain(msg) | Error::Calibration(msg) => FaultKind::Integration(msg),
    }
}

/// Runs the closed loop (nominal → filter → dynamics) and logs a trace.
pub fn simulate(
    cfg: &SimulationConfig,
    spec: &SafetySpec,
    model: &TubeModel,
) -> Result<SimulationTrace, SimulationError> {
    let fault = |time: f64, kind: FaultKind, partial: SimulationTrace| SimulationError { time, kind, partial };
    let n = cfg
        .validate()
        .and_then(|_| cfg.steps())
        .map_err(|e| fault(0.0, FaultKind::Config(e.to_string()), SimulationTrace::default()))?;
    if cfg.filter_enabled {
        spec.validate()
            .map_err(|e| fault(0.0, FaultKind::Config(e.to_string()), SimulationTrace::default()))?;
    }

    let controller = Controller { cfg, spec, model };
    let mut trace = SimulationTrace {
        rows: Vec::with_capacity(n / cfg.log_stride + 1),
        pressure: Vec::with_capacity(2 * n + 1),
    };
    let mut st = cfg.initial_state;
    for i in 0..=n {
        let t = i as f64 * cfg.dt;
        let decision = match controller.decide(t, &st) {
            Ok(d) => d,
            Err(e) => return Err(fault(t, classify(e), trace)),
        };
        if i % cfg.log_stride == 0 {
            trace.rows.push(TraceRow {
                t,
                lambda_theta: st.stretch.lambda_theta,
                lambda_z: st.stretch.lambda_z,
                dlambda_theta: st.rate[0],
                dlambda_z: st.rate[1],
                u_nom: decision.u_nom,
                u_safe: decision.u_safe,
                h: decision.h,
                psi1: decision.psi1,
                w: strain_energy(&model.material, &st.stretch),
                active: decision.active,
            });
        }
        if i == n {
            trace.pressure.push((t, decision.u_safe));
            break;
        }
        let locate = cfg.filter_enabled && cfg.input_bounds.is_none();
        let next = match cfg.control_update {
            ControlUpdate::ZeroOrderHold => {
                trace.pressure.push((t, decision.u_safe));
                rk4_step(model, &st, decision.u_safe, cfg.dt)
            }
            _ if !cfg.filter_enabled => {
                // Open loop: the input is a function of time alone.
                trace.pressure.push((t, decision.u_safe));
                match &cfg.nominal {
                    NominalControl::Replay(profile) => knot_aligned_step(model, &st, t, cfg.dt, profile),
                    nominal => rk4_step_feedback(model, &st, t, cfg.dt, |tau, _| Ok(nominal.at(tau))),
                }
            }
            ControlUpdate::SwitchLocated if locate => controller.located_step(&st, t, cfg.dt, &mut trace.pressure),
            _ => rk4_step_feedback(model, &st, t, cfg.dt, |tau, s| controller.input(tau, s)).and_then(|next| {
                controller
                    .record(&mut trace.pressure, t, cfg.dt, &st, &next)
                    .map(|_| next)
            }),
        };
        st = match next {
            Ok(s) => s,
            Err(e) => return Err(fault(t, classify(e), trace)),
        };
    }
    Ok(trace)
}

/// Open-loop simulation driven by a recorded pressure history.
///
/// The filter is off; barrier columns are still logged.
pub fn replay(
    profile: &PressureProfile,
    cfg: &SimulationConfig,
    spec: &SafetySpec,
    model: &TubeModel,
) -> Result<SimulationTrace, SimulationError> {
    let open_loop = SimulationConfig {
        nominal: NominalControl::Replay(profile.clone()),
        filter_enabled: false,
        ..cfg.clone()
    };
    simulate(&open_loop, spec, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::MaterialParams;
    use crate::tube::TubeGeometry;

    fn model(mu: f64, eta: f64) -> TubeModel {
        TubeModel::new(MaterialParams { mu, eta }, TubeGeometry::default()).unwrap()
    }

    #[test]
    fn profile_interpolation() {
        let p = PressureProfile::new(&[(0.0, 0.0), (1.0, 10.0), (2.0, 10.0)]).unwrap();
        assert_eq!(p.at(0.5), 5.0);
        assert_eq!(p.at(1.5), 10.0);
        assert_eq!(p.at(2.0), 10.0);
        assert!(p.covers(0.0, 2.0));
        assert!(!p.covers(0.0, 2.5));
        assert!(PressureProfile::new(&[(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(PressureProfile::new(&[(0.0, 1.0)]).is_err());
    }

    #[test]
    fn half_sinusoid_cuts_off() {
        let n = NominalControl::default();
        assert!((n.at(0.25) - 10_000.0).abs() < 1e-9);
        assert_eq!(n.at(0.5), 0.0);
        assert_eq!(n.at(0.75), 0.0);
        assert!(n.at(0.1) > 0.0);
    }

    #[test]
    fn step_count_validation() {
        let mut cfg = SimulationConfig::default();
        assert_eq!(cfg.steps().unwrap(), 10_000);
        cfg.dt = 1.0;
        assert!(cfg.steps().is_err());
        cfg.dt = 0.3;
        assert!(cfg.steps().is_err());
        cfg.dt = 0.25;
        assert_eq!(cfg.steps().unwrap(), 4);
    }

    #[test]
    fn rk4_step_is_identity_without_forces() {
        let m = TubeModel::new(MaterialParams { mu: 1e-300, eta: 0.0 }, TubeGeometry::default()).unwrap();
        let next = rk4_step(&m, &StretchState::REST, 0.0, 1e-3).unwrap();
        assert_eq!(next, StretchState::REST);
    }

    #[test]
    fn rest_trace_is_constant_without_input() {
        let cfg = SimulationConfig {
            t_end: 0.01,
            nominal: NominalControl::Constant { pressure: 0.0 },
            filter_enabled: false,
            ..SimulationConfig::default()
        };
        let trace = simulate(&cfg, &SafetySpec::default(), &model(7900.0, 50.0)).unwrap();
        assert_eq!(trace.len(), 101);
        for r in &trace.rows {
            assert_eq!(
                (r.lambda_theta, r.lambda_z, r.dlambda_theta, r.dlambda_z),
                (1.0, 1.0, 0.0, 0.0)
            );
            assert_eq!(r.h, 7900.0);
        }
    }

    #[test]
    fn log_stride_decimates() {
        let cfg = SimulationConfig {
            t_end: 0.01,
            log_stride: 10,
            ..SimulationConfig::default()
        };
        let trace = simulate(&cfg, &SafetySpec::default(), &model(7900.0, 3200.0)).unwrap();
        assert_eq!(trace.len(), 11);
        for w in trace.rows.windows(2) {
            assert!((w[1].t - w[0].t - 1e-3).abs() < 1e-12);
        }
    }

    #[test]
    fn replay_rejects_short_history() {
        let profile = PressureProfile::new(&[(0.0, 0.0), (0.5, 0.0)]).unwrap();
        let err = replay(
            &profile,
            &SimulationConfig::default(),
            &SafetySpec::default(),
            &model(7900.0, 10.0),
        )
        .unwrap_err();
        assert!(matches!(err.kind, FaultKind::Config(_)));
    }

    #[test]
    fn active_intervals_are_maximal_runs() {
        let mk = |active| TraceRow {
            t: 0.0,
            lambda_theta: 1.0,
            lambda_z: 1.0,
            dlambda_theta: 0.0,
            dlambda_z: 0.0,
            u_nom: 0.0,
            u_safe: 0.0,
            h: 0.0,
            psi1: 0.0,
            w: 0.0,
            active,
        };
        let trace = SimulationTrace {
            rows: [false, true, true, false, true].into_iter().map(mk).collect(),
            ..SimulationTrace::default()
        };
        assert_eq!(trace.active_intervals(), vec![(1, 3), (4, 5)]);
    }
}
