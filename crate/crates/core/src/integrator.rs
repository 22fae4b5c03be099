//! Classical fourth-order Runge-Kutta stepping and the evolution loop.
//!
//! Time after `n` full steps is `t0 + n dt` (a product, never a running
//! sum), so two runs with the same `dt` report bit-identical sample times.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{Model, State};

/// A state the RK4 combinator can form linear combinations of.
pub trait RkState: Clone {
    fn time(&self) -> f64;
    fn set_time(&mut self, t: f64);
    /// `self += a * x`, time untouched.
    fn axpy(&mut self, a: f64, x: &Self);
    fn all_finite(&self) -> bool;
}

/// An autonomous right-hand side.
pub trait Rhs {
    type State: RkState;
    fn eval(&self, state: &Self::State) -> Result<Self::State>;

    /// Hook run on each accepted step, before the time is stamped.
    fn post_step(&self, _state: &mut Self::State) {}
}

impl RkState for State {
    fn time(&self) -> f64 {
        self.t()
    }

    fn set_time(&mut self, t: f64) {
        self.set_t(t)
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        for (dst, src) in self.components_mut().into_iter().zip(x.components()) {
            for (d, s) in dst.coeffs_mut().iter_mut().zip(src.coeffs()) {
                *d += s * a;
            }
        }
    }

    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl Rhs for Model {
    type State = State;

    fn eval(&self, state: &State) -> Result<State> {
        self.rhs(state)
    }

    fn post_step(&self, state: &mut State) {
        self.filter(state);
    }
}

/// One RK4 step of size `dt`; the returned state has time `state.time() + dt`.
pub fn rk4_step<R: Rhs>(rhs: &R, state: &R::State, dt: f64) -> Result<R::State> {
    let t = state.time();
    let k1 = rhs.eval(state)?;

    let mut y = state.clone();
    y.axpy(0.5 * dt, &k1);
    y.set_time(t + 0.5 * dt);
    let k2 = rhs.eval(&y)?;

    let mut y = state.clone();
    y.axpy(0.5 * dt, &k2);
    y.set_time(t + 0.5 * dt);
    let k3 = rhs.eval(&y)?;

    let mut y = state.clone();
    y.axpy(dt, &k3);
    y.set_time(t + dt);
    let k4 = rhs.eval(&y)?;

    let mut out = state.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    out.set_time(t + dt);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Callbacks fire after every `cadence` completed steps.
    pub cadence: usize,
}

impl EvolveConfig {
    pub fn new(t_end: f64, dt: f64, cadence: usize) -> Self {
        EvolveConfig { t_end, dt, cadence }
    }

    fn validate(&self, t0: f64) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if self.cadence == 0 {
            return Err(Error::InvalidParameter("cadence must be >= 1".into()));
        }
        if !(self.t_end.is_finite() && self.t_end >= t0) {
            return Err(Error::InvalidParameter(format!(
                "t_end = {} precedes the initial time {t0}",
                self.t_end
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub step: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Control {
    Continue,
    Stop(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// Reached `t_end`.
    Completed,
    /// A callback asked to stop.
    Stopped { reason: String },
    /// `exp(u)` would overflow during the step starting at the last good time.
    Overflow { t: f64, max_u: f64 },
    /// The step produced NaN or infinity.
    NotANumber { last_good_t: f64 },
    /// Any other error raised by the right-hand side.
    Failed { message: String },
}

impl Termination {
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Termination::Overflow { .. }
                | Termination::NotANumber { .. }
                | Termination::Failed { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub step: usize,
    pub t: f64,
    pub termination: Termination,
}

#[derive(Debug, Clone)]
pub struct Evolution<S> {
    /// Last good state.
    pub state: S,
    pub steps: usize,
    pub events: Vec<Event>,
    pub termination: Termination,
}

/// Step from `state` to `config.t_end`, calling `callback` every
/// `config.cadence` steps. The last step is shortened to land exactly on
/// `t_end`. Solver failures end the run and are reported in the returned
/// [`Evolution`], not as `Err`; only an invalid configuration errors.
pub fn evolve<R, F>(
    rhs: &R,
    state: R::State,
    config: &EvolveConfig,
    mut callback: F,
) -> Result<Evolution<R::State>>
where
    R: Rhs,
    F: FnMut(&R::State, StepInfo) -> Control,
{
    let t0 = state.time();
    config.validate(t0)?;
    let dt = config.dt;
    let ratio = (config.t_end - t0) / dt;
    let nearest = ratio.round();
    let (full_steps, partial) = if (ratio - nearest).abs() < 1e-9 * ratio.max(1.0) {
        (nearest as usize, false)
    } else {
        (ratio.floor() as usize, true)
    };
    let total = full_steps + usize::from(partial);

    let mut current = state;
    let mut events = Vec::new();
    for n in 0..total {
        let last = n + 1 == total;
        let step_dt = if last && partial {
            config.t_end - current.time()
        } else {
            dt
        };
        let next = match rk4_step(rhs, &current, step_dt) {
            Ok(s) => s,
            Err(e) => {
                let termination = match e {
                    Error::Overflow { t, max_u } => Termination::Overflow { t, max_u },
                    other => Termination::Failed {
                        message: other.to_string(),
                    },
                };
                return Ok(finish(current, n, events, termination));
            }
        };
        if !next.all_finite() {
            let termination = Termination::NotANumber {
                last_good_t: current.time(),
            };
            return Ok(finish(current, n, events, termination));
        }
        current = next;
        rhs.post_step(&mut current);
        let step = n + 1;
        let t = if last {
            config.t_end
        } else {
            t0 + step as f64 * dt
        };
        current.set_time(t);
        if step % config.cadence == 0 {
            if let Control::Stop(reason) = callback(&current, StepInfo { step, t }) {
                return Ok(finish(
                    current,
                    step,
                    events,
                    Termination::Stopped { reason },
                ));
            }
        }
    }
    events.push(Event {
        step: total,
        t: current.time(),
        termination: Termination::Completed,
    });
    Ok(Evolution {
        state: current,
        steps: total,
        events,
        termination: Termination::Completed,
    })
}

fn finish<S: RkState>(
    state: S,
    steps: usize,
    mut events: Vec<Event>,
    termination: Termination,
) -> Evolution<S> {
    events.push(Event {
        step: steps,
        t: state.time(),
        termination: termination.clone(),
    });
    Evolution {
        state,
        steps,
        events,
        termination,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `x' = y, y' = -x`.
    #[derive(Clone, Debug)]
    struct Osc {
        x: f64,
        y: f64,
        t: f64,
    }

    impl RkState for Osc {
        fn time(&self) -> f64 {
            self.t
        }
        fn set_time(&mut self, t: f64) {
            self.t = t
        }
        fn axpy(&mut self, a: f64, o: &Self) {
            self.x += a * o.x;
            self.y += a * o.y;
        }
        fn all_finite(&self) -> bool {
            self.x.is_finite() && self.y.is_finite()
        }
    }

    struct Harmonic;

    impl Rhs for Harmonic {
        type State = Osc;
        fn eval(&self, s: &Osc) -> Result<Osc> {
            Ok(Osc {
                x: s.y,
                y: -s.x,
                t: s.t,
            })
        }
    }

    struct Zero;

    impl Rhs for Zero {
        type State = Osc;
        fn eval(&self, s: &Osc) -> Result<Osc> {
            Ok(Osc {
                x: 0.0,
                y: 0.0,
                t: s.t,
            })
        }
    }

    struct Blows;

    impl Rhs for Blows {
        type State = Osc;
        fn eval(&self, s: &Osc) -> Result<Osc> {
            if s.t > 0.5 {
                Err(Error::Overflow {
                    t: s.t,
                    max_u: 701.0,
                })
            } else {
                Ok(Osc {
                    x: 1.0,
                    y: 0.0,
                    t: s.t,
                })
            }
        }
    }

    struct MakesNan;

    impl Rhs for MakesNan {
        type State = Osc;
        fn eval(&self, s: &Osc) -> Result<Osc> {
            let x = if s.t >= 0.3 { f64::NAN } else { 1.0 };
            Ok(Osc { x, y: 0.0, t: s.t })
        }
    }

    fn start() -> Osc {
        Osc {
            x: 1.0,
            y: 0.0,
            t: 0.0,
        }
    }

    #[test]
    fn zero_rhs_only_advances_time() {
        let s = rk4_step(&Zero, &start(), 0.1).unwrap();
        assert_eq!((s.x, s.y), (1.0, 0.0));
        assert_eq!(s.t, 0.1);
    }

    #[test]
    fn one_step_local_error_is_fifth_order() {
        let err = |dt: f64| {
            let s = rk4_step(&Harmonic, &start(), dt).unwrap();
            ((s.x - dt.cos()).powi(2) + (s.y + dt.sin()).powi(2)).sqrt()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 32.0).abs() < 0.1 * 32.0, "ratio {ratio}");
    }

    #[test]
    fn zero_length_run() {
        let out = evolve(
            &Harmonic,
            start(),
            &EvolveConfig::new(0.0, 0.1, 1),
            |_, _| panic!("no steps expected"),
        )
        .unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.termination, Termination::Completed);
        assert_eq!(out.state.x, 1.0);
    }

    #[test]
    fn callback_cadence() {
        let mut calls = Vec::new();
        let out = evolve(
            &Harmonic,
            start(),
            &EvolveConfig::new(1.0, 1e-3, 100),
            |_, info| {
                calls.push(info.step);
                Control::Continue
            },
        )
        .unwrap();
        assert_eq!(out.steps, 1000);
        assert_eq!(calls.len(), 10);
        assert_eq!(calls[9], 1000);
        assert_eq!(out.state.t, 1.0);
    }

    #[test]
    fn time_is_multiplicative() {
        let mut times = Vec::new();
        evolve(
            &Harmonic,
            start(),
            &EvolveConfig::new(0.3, 3e-4, 1),
            |s, info| {
                times.push((info.step, s.t));
                Control::Continue
            },
        )
        .unwrap();
        for &(n, t) in &times[..times.len() - 1] {
            assert_eq!(t, n as f64 * 3e-4);
        }
    }

    #[test]
    fn partial_final_step_lands_on_t_end() {
        let out = evolve(
            &Harmonic,
            start(),
            &EvolveConfig::new(0.25, 0.1, 1),
            |_, _| Control::Continue,
        )
        .unwrap();
        assert_eq!(out.steps, 3);
        assert_eq!(out.state.t, 0.25);
        assert!((out.state.x - 0.25f64.cos()).abs() < 1e-6);
    }

    #[test]
    fn callback_stop() {
        let out = evolve(
            &Harmonic,
            start(),
            &EvolveConfig::new(1.0, 0.01, 10),
            |_, info| {
                if info.step >= 30 {
                    Control::Stop("enough".into())
                } else {
                    Control::Continue
                }
            },
        )
        .unwrap();
        assert_eq!(out.steps, 30);
        assert_eq!(
            out.termination,
            Termination::Stopped {
                reason: "enough".into()
            }
        );
    }

    #[test]
    fn overflow_terminates_with_event() {
        let out = evolve(&Blows, start(), &EvolveConfig::new(1.0, 0.1, 1), |_, _| {
            Control::Continue
        })
        .unwrap();
        assert!(matches!(out.termination, Termination::Overflow { .. }));
        assert!(out.state.t <= 0.5 + 1e-12);
        assert_eq!(out.events.len(), 1);
    }

    #[test]
    fn nan_aborts_with_last_good_time() {
        let out = evolve(
            &MakesNan,
            start(),
            &EvolveConfig::new(1.0, 0.1, 1),
            |_, _| Control::Continue,
        )
        .unwrap();
        match out.termination {
            Termination::NotANumber { last_good_t } => {
                assert_eq!(last_good_t, out.state.t);
                assert!(out.state.x.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_config() {
        assert!(evolve(
            &Harmonic,
            start(),
            &EvolveConfig::new(1.0, 0.0, 1),
            |_, _| Control::Continue
        )
        .is_err());
        assert!(evolve(
            &Harmonic,
            start(),
            &EvolveConfig::new(1.0, 0.1, 0),
            |_, _| Control::Continue
        )
        .is_err());
        assert!(evolve(
            &Harmonic,
            start(),
            &EvolveConfig::new(-1.0, 0.1, 1),
            |_, _| Control::Continue
        )
        .is_err());
    }
}
