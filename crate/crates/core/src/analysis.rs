//! ε-sweeps: L∞ distance to the dispersionless solution at the break-up
//! time, blow-up times, and log-log regressions of both.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::integrator::{evolve, Control, EvolveConfig, Termination};
use crate::models::{InitialData, Model, ModelSpec, Rho, State};
use crate::singtrack::{TrackMode, Tracker};

/// `max |a - b|` over the grid.
pub fn linf_diff(a: &Field, b: &Field) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(format!(
            "{:?} vs {:?}",
            a.grid(),
            b.grid()
        )));
    }
    Ok(a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs())))
}

/// Root-mean-square of `a - b` over the grid.
pub fn l2_diff(a: &Field, b: &Field) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(format!(
            "{:?} vs {:?}",
            a.grid(),
            b.grid()
        )));
    }
    let n = a.values().len() as f64;
    let s: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((s / n).sqrt())
}

/// Line `log10 y = a log10 eps + b` with correlation coefficient `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingResult {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub points: Vec<(f64, f64)>,
}

impl ScalingResult {
    pub fn predict(&self, eps: f64) -> f64 {
        10f64.powf(self.a * eps.log10() + self.b)
    }
}

pub fn scaling_regression(points: &[(f64, f64)]) -> Result<ScalingResult> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if let Some(&(e, y)) = points.iter().find(|(e, y)| !(*e > 0.0 && *y > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "log-log regression needs positive data, got ({e}, {y})"
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "regression needs at least two distinct epsilon values".into(),
        ));
    }
    let a = sxy / sxx;
    let r = if syy == 0.0 {
        1.0
    } else {
        (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
    };
    Ok(ScalingResult {
        a,
        b: my - a * mx,
        r,
        points: points.to_vec(),
    })
}

/// `n` equispaced values from `first` to `last` inclusive.
pub fn epsilon_list(first: f64, last: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![first],
        _ => (0..n)
            .map(|i| first + (last - first) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Ten values from 0.02 to 0.1, used for the 1D hyperbolic sweep.
pub fn hyperbolic_epsilons() -> Vec<f64> {
    epsilon_list(0.02, 0.1, 10)
}

/// `{0.01, ..., 0.1}`.
pub fn default_epsilons() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub t_c_reference: f64,
    pub delta_inf: Option<f64>,
    pub t_star: Option<f64>,
    pub rho: Rho,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
}

impl SweepRecord {
    fn new(spec: &ModelSpec, t_c: f64) -> Self {
        SweepRecord {
            epsilon: spec.epsilon,
            t_c_reference: t_c,
            delta_inf: None,
            t_star: None,
            rho: spec.rho,
            nx: spec.grid.nx,
            ny: spec.grid.ny,
            dt: spec.dt,
        }
    }
}

/// An ε dropped from a sweep, and why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Excluded {
    pub epsilon: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub records: Vec<SweepRecord>,
    pub excluded: Vec<Excluded>,
    pub result: ScalingResult,
}

impl Sweep {
    pub fn is_partial(&self) -> bool {
        !self.excluded.is_empty()
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// Evolve `spec` from `initial` to exactly `t`; any early termination is an
/// error message.
pub fn evolve_to(
    spec: &ModelSpec,
    initial: InitialData,
    t: f64,
) -> Result<(Model, std::result::Result<State, String>)> {
    let model = Model::new(*spec)?;
    let state = initial.build(model.fourier())?;
    let config = EvolveConfig::new(t, spec.dt, usize::MAX);
    let run = evolve(&model, state, &config, |_, _| Control::Continue)?;
    let outcome = match run.termination {
        Termination::Completed => Ok(run.state),
        other => Err(format!("run stopped before t = {t}: {other:?}")),
    };
    Ok((model, outcome))
}

/// `Δ∞` at `t_c` between each `model_for(eps)` run and the dispersionless
/// reference `reference`, measured on `u` (`u = U_x` in 2D). Runs are
/// distributed over `jobs` threads.
pub fn linf_sweep<F>(
    reference: &ModelSpec,
    model_for: F,
    initial: InitialData,
    epsilons: &[f64],
    t_c: f64,
    jobs: usize,
) -> Result<(Vec<SweepRecord>, Vec<Excluded>)>
where
    F: Fn(f64) -> ModelSpec + Sync,
{
    let (ref_model, ref_state) = evolve_to(reference, initial, t_c)?;
    let ref_state = ref_state.map_err(|reason| {
        Error::InvalidParameter(format!("dispersionless reference failed: {reason}"))
    })?;
    let ref_u = ref_state.u_field(ref_model.fourier())?;

    let outcomes: Vec<Result<std::result::Result<SweepRecord, Excluded>>> =
        pool(jobs)?.install(|| {
            epsilons
                .par_iter()
                .map(|&eps| {
                    let spec = model_for(eps);
                    let (model, state) = evolve_to(&spec, initial, t_c)?;
                    Ok(match state {
                        Ok(state) => {
                            let mut rec = SweepRecord::new(&spec, t_c);
                            rec.delta_inf =
                                Some(linf_diff(&state.u_field(model.fourier())?, &ref_u)?);
                            Ok(rec)
                        }
                        Err(reason) => Err(Excluded {
                            epsilon: eps,
                            reason,
                        }),
                    })
                })
                .collect()
        });
    split(outcomes)
}

fn split(
    outcomes: Vec<Result<std::result::Result<SweepRecord, Excluded>>>,
) -> Result<(Vec<SweepRecord>, Vec<Excluded>)> {
    let mut records = Vec::new();
    let mut excluded = Vec::new();
    for o in outcomes {
        match o? {
            Ok(r) => records.push(r),
            Err(x) => {
                log::warn!("epsilon = {} excluded: {}", x.epsilon, x.reason);
                excluded.push(x);
            }
        }
    }
    Ok((records, excluded))
}

/// Sweep parameters shared by both experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSetup {
    /// Grid, ρ and time step; its ε is ignored.
    pub base: ModelSpec,
    pub initial: InitialData,
    /// Break-up time of the dispersionless system.
    pub t_c: f64,
    pub epsilons: Vec<f64>,
    pub jobs: usize,
}

/// `Δ∞(ε)` at `t_c` and its power law.
pub fn run_scaling_experiment(setup: &SweepSetup) -> Result<Sweep> {
    if setup.epsilons.len() < 3 {
        return Err(Error::TooFewPoints(setup.epsilons.len()));
    }
    let base = setup.base;
    let (records, excluded) = linf_sweep(
        &base.with_epsilon(0.0),
        |eps| base.with_epsilon(eps),
        setup.initial,
        &setup.epsilons,
        setup.t_c,
        setup.jobs,
    )?;
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.delta_inf.map(|d| (r.epsilon, d)))
        .collect();
    let result = scaling_regression(&points)?;
    Ok(Sweep {
        records,
        excluded,
        result,
    })
}

/// Blow-up time of one dispersive elliptic run: first tracker sample with
/// `delta_u < m`, sampled every `cadence` steps up to `t_max`.
pub fn blowup_time(
    spec: &ModelSpec,
    initial: InitialData,
    t_max: f64,
    cadence: usize,
) -> Result<std::result::Result<f64, String>> {
    let model = Model::new(*spec)?;
    let state = initial.build(model.fourier())?;
    let mut tracker = Tracker::new(model.fourier().clone(), TrackMode::Elliptic);
    let run = evolve(
        &model,
        state,
        &EvolveConfig::new(t_max, spec.dt, cadence),
        |s, _| tracker.observe(s),
    )?;
    let detected = tracker.summary().ok().and_then(|s| s.detection.time());
    Ok(match (detected, run.termination) {
        (Some(t), _) => Ok(t),
        (None, Termination::Completed) => Err(format!("no blow-up detected up to t = {t_max}")),
        (None, other) => Err(format!("run ended before detection: {other:?}")),
    })
}

/// Blow-up setup: the detection is sampled every `cadence` steps (the
/// blow-up completes within a few dozen steps, so keep this small) and runs
/// stop at `t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupSetup {
    pub sweep: SweepSetup,
    pub t_max: f64,
    pub cadence: usize,
}

/// `t*(ε)` and the power law of `t* - t_c`.
pub fn run_blowup_sweep(setup: &BlowupSetup) -> Result<Sweep> {
    let s = &setup.sweep;
    if s.epsilons.len() < 3 {
        return Err(Error::TooFewPoints(s.epsilons.len()));
    }
    if s.base.rho != Rho::Elliptic {
        return Err(Error::InvalidParameter(
            "blow-up sweeps need the elliptic system".into(),
        ));
    }
    let outcomes: Vec<Result<std::result::Result<SweepRecord, Excluded>>> =
        pool(s.jobs)?.install(|| {
            s.epsilons
                .par_iter()
                .map(|&eps| {
                    let spec = s.base.with_epsilon(eps);
                    Ok(
                        match blowup_time(&spec, s.initial, setup.t_max, setup.cadence)? {
                            Ok(t) if t > s.t_c => {
                                let mut rec = SweepRecord::new(&spec, s.t_c);
                                rec.t_star = Some(t);
                                Ok(rec)
                            }
                            Ok(t) => Err(Excluded {
                                epsilon: eps,
                                reason: format!("t* = {t} is not after t_c = {}", s.t_c),
                            }),
                            Err(reason) => Err(Excluded {
                                epsilon: eps,
                                reason,
                            }),
                        },
                    )
                })
                .collect()
        });
    let (records, excluded) = split(outcomes)?;
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.t_star.map(|t| (r.epsilon, t - r.t_c_reference)))
        .collect();
    let result = scaling_regression(&points)?;
    Ok(Sweep {
        records,
        excluded,
        result,
    })
}
