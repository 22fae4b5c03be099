//! Command-line driver: `run`, `track`, `sweep` and `diff`.
//!
//! Exit codes:
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | success                                              |
//! | 1    | internal error                                       |
//! | 2    | usage or configuration error                         |
//! | 3    | solver failure (overflow or NaN before `t_end`)      |
//! | 4    | I/O failure or malformed snapshot/CSV file           |
//! | 5    | grid mismatch between compared snapshots             |
//! | 6    | partial sweep: some ε values were excluded           |
//!
//! Output files go to the directory named by `TODA_LAB_OUT`, else `--out`,
//! else `output.dir` of the config.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    default_epsilons, hyperbolic_epsilons, l2_diff, linf_diff, run_blowup_sweep,
    run_scaling_experiment, BlowupSetup, Excluded, ScalingResult, SweepSetup,
};
use crate::error::{Error, Result};
use crate::integrator::{evolve, Control, EvolveConfig, Termination};
use crate::io::{
    read_snapshot, write_energy, write_json, write_series, write_snapshot, write_sweep, RunConfig,
    Snapshot,
};
use crate::models::{energy_drift, Model, Rho};
use crate::singtrack::{TrackSummary, Tracker};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_IO: u8 = 4;
pub const EXIT_GRID_MISMATCH: u8 = 5;
pub const EXIT_PARTIAL: u8 = 6;

pub const OUT_ENV: &str = "TODA_LAB_OUT";

#[derive(Debug, Parser)]
#[command(name = "toda-lab", version, about = "Pseudospectral Toda equation lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output directory (overridden by TODA_LAB_OUT).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Tracker cadence in steps.
    #[arg(long, global = true)]
    pub cadence: Option<usize>,

    /// Worker threads for sweeps (default: available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Only print warnings and errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    /// Seed for stochastic utilities; the solvers are deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a configured model; writes snapshots, energy series, summary.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evolve with the singularity tracker; writes the fit series.
    Track {
        #[arg(long)]
        config: PathBuf,
    },
    /// Epsilon sweep: L∞ scaling at t_c or blow-up times.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "scaling")]
        mode: SweepMode,
    },
    /// L∞ and L2 differences between two snapshots.
    Diff { a: PathBuf, b: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Scaling,
    Blowup,
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::InvalidGrid(_)
        | Error::TooFewPoints(_)
        | Error::NearResonance { .. } => EXIT_CONFIG,
        Error::Overflow { .. } | Error::NotANumber { .. } => EXIT_SOLVER,
        Error::Io { .. }
        | Error::Csv(_)
        | Error::Json(_)
        | Error::BadMagic(_)
        | Error::BadHeader(_)
        | Error::Truncated { .. }
        | Error::SizeMismatch { .. } => EXIT_IO,
        Error::GridMismatch(_) => EXIT_GRID_MISMATCH,
        _ => EXIT_INTERNAL,
    }
}

/// Parse arguments from the process, run, and map the outcome to an exit
/// code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run_cli(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Execute a parsed command line; `Ok` carries a non-error exit code.
pub fn run_cli(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Run { config } => cmd_run(cli, config, false),
        Command::Track { config } => cmd_run(cli, config, true),
        Command::Sweep { config, mode } => cmd_sweep(cli, config, *mode),
        Command::Diff { a, b } => cmd_diff(a, b),
    }
}

fn output_dir(cli: &Cli, config: &RunConfig) -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .or_else(|| cli.out.clone())
        .unwrap_or_else(|| config.output.dir.clone())
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub final_t: f64,
    pub steps: usize,
    pub energy_drift: Option<f64>,
    pub termination: Termination,
    pub tracker: Option<TrackSummary>,
    pub snapshots: Vec<PathBuf>,
    pub config: RunConfig,
}

fn cmd_run(cli: &Cli, config_path: &Path, track: bool) -> Result<u8> {
    let mut config = RunConfig::load(config_path)?;
    if let Some(c) = cli.cadence {
        if c == 0 {
            return Err(Error::Config("--cadence must be positive".into()));
        }
        config.tracker.cadence = c;
    }
    if track {
        config.tracker.enabled = true;
    }
    let dir = output_dir(cli, &config);
    prepare_dir(&dir)?;

    let spec = config.model_spec()?;
    let model = Model::new(spec)?;
    let state = config.initial.data.build(model.fourier())?;
    let e0 = model.energy(&state)?;
    let mut tracker = config.tracker.enabled.then(|| {
        let t = Tracker::new(model.fourier().clone(), config.track_mode())
            .with_window(config.window().expect("validated"));
        if config.tracker.stop {
            t
        } else {
            t.keep_running()
        }
    });

    let mut schedule: Vec<f64> = config.snapshots.times.clone();
    schedule.sort_by(f64::total_cmp);
    schedule.reverse();
    let mut snapshots = Vec::new();
    let mut io_error = None;
    let save = |state: &_, snapshots: &mut Vec<PathBuf>| -> Result<()> {
        let path = dir.join(format!("snapshot_{:03}.bin", snapshots.len()));
        write_snapshot(&path, &Snapshot::from_state(&spec, state, model.fourier())?)?;
        snapshots.push(path);
        Ok(())
    };
    while schedule.last().is_some_and(|&t| t <= state.t() + 1e-12) {
        schedule.pop();
        save(&state, &mut snapshots)?;
    }

    let mut energy = vec![(state.t(), 0.0)];
    let tracker_cadence = config.tracker.cadence;
    let energy_every = config.output.energy_every;
    log::info!(
        "evolving {}D {:?} eps = {} on {}x{} to t = {}",
        spec.dim(),
        spec.rho,
        spec.epsilon,
        spec.grid.nx,
        spec.grid.ny,
        config.model.t_end
    );
    let run = evolve(
        &model,
        state,
        &EvolveConfig::new(config.model.t_end, spec.dt, 1),
        |s, info| {
            if info.step % energy_every == 0 {
                if let Ok(d) = model.energy(s).and_then(|e| energy_drift(e, e0)) {
                    energy.push((info.t, d));
                }
            }
            while schedule.last().is_some_and(|&t| t <= info.t + 1e-12) {
                schedule.pop();
                if let Err(e) = save(s, &mut snapshots) {
                    io_error = Some(e);
                    return Control::Stop("snapshot write failed".into());
                }
            }
            match &mut tracker {
                Some(tr) if info.step % tracker_cadence == 0 => tr.observe(s),
                _ => Control::Continue,
            }
        },
    )?;
    if let Some(e) = io_error {
        return Err(e);
    }
    if config.snapshots.last {
        save(&run.state, &mut snapshots)?;
    }
    let final_drift = model
        .energy(&run.state)
        .and_then(|e| energy_drift(e, e0))
        .ok();
    if let Some(d) = final_drift {
        if energy.last().map(|p| p.0) != Some(run.state.t()) {
            energy.push((run.state.t(), d));
        }
    }
    write_energy(dir.join("energy.csv"), &energy)?;

    let tracker_summary = match &tracker {
        Some(tr) => {
            if track {
                write_series(dir.join("series.csv"), tr.series())?;
            }
            Some(tr.summary()?)
        }
        None => None,
    };
    if let Some(s) = &tracker_summary {
        match s.detection.time() {
            Some(t) => log::info!("{:?} rule fired: t = {t:.4}", s.mode),
            None => log::info!("no singularity detected"),
        }
    }
    let summary = RunSummary {
        final_t: run.state.t(),
        steps: run.steps,
        energy_drift: final_drift,
        termination: run.termination.clone(),
        tracker: tracker_summary,
        snapshots,
        config,
    };
    write_json(dir.join("summary.json"), &summary)?;
    log::info!(
        "stopped at t = {} ({:?}); energy drift {:?}",
        summary.final_t,
        summary.termination,
        summary.energy_drift
    );
    Ok(if run.termination.is_solver_failure() {
        EXIT_SOLVER
    } else {
        EXIT_OK
    })
}

#[derive(Debug, Serialize)]
struct SweepSummary<'a> {
    mode: SweepMode,
    t_c: f64,
    result: &'a ScalingResult,
    excluded: &'a [Excluded],
}

fn cmd_sweep(cli: &Cli, config_path: &Path, mode: SweepMode) -> Result<u8> {
    let config = RunConfig::load(config_path)?;
    let sweep_cfg = config
        .sweep
        .clone()
        .ok_or_else(|| Error::Config("sweep needs a [sweep] table".into()))?;
    let dir = output_dir(cli, &config);
    prepare_dir(&dir)?;
    let base = config.model_spec()?;
    let epsilons = sweep_cfg
        .epsilons
        .clone()
        .unwrap_or_else(|| match base.rho {
            Rho::Hyperbolic => hyperbolic_epsilons(),
            Rho::Elliptic => default_epsilons(),
        });
    if epsilons.len() < 3 {
        return Err(Error::Config(format!(
            "a sweep needs at least 3 epsilon values, got {}",
            epsilons.len()
        )));
    }
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(Error::Config("--jobs must be positive".into()));
    }
    let setup = SweepSetup {
        base,
        initial: config.initial.data,
        t_c: sweep_cfg.t_c,
        epsilons,
        jobs,
    };
    log::info!(
        "{mode:?} sweep over {} values of epsilon",
        setup.epsilons.len()
    );
    let sweep = match mode {
        SweepMode::Scaling => run_scaling_experiment(&setup)?,
        SweepMode::Blowup => run_blowup_sweep(&BlowupSetup {
            t_max: sweep_cfg.t_max.unwrap_or(config.model.t_end),
            cadence: cli.cadence.unwrap_or(sweep_cfg.cadence),
            sweep: setup.clone(),
        })?,
    };
    write_sweep(dir.join("sweep.csv"), &sweep.records)?;
    write_json(
        dir.join("scaling.json"),
        &SweepSummary {
            mode,
            t_c: setup.t_c,
            result: &sweep.result,
            excluded: &sweep.excluded,
        },
    )?;
    log::info!(
        "a = {:.4}, b = {:.4}, r = {:.5}",
        sweep.result.a,
        sweep.result.b,
        sweep.result.r
    );
    Ok(if sweep.is_partial() {
        log::warn!("{} epsilon values excluded", sweep.excluded.len());
        EXIT_PARTIAL
    } else {
        EXIT_OK
    })
}

fn cmd_diff(a: &Path, b: &Path) -> Result<u8> {
    let sa = read_snapshot(a)?;
    let sb = read_snapshot(b)?;
    if sa.header.grid != sb.header.grid {
        return Err(Error::GridMismatch(format!(
            "{} has {:?}, {} has {:?}",
            a.display(),
            sa.header.grid,
            b.display(),
            sb.header.grid
        )));
    }
    if sa.header.fields != sb.header.fields {
        return Err(Error::GridMismatch(format!(
            "field lists differ: {:?} vs {:?}",
            sa.header.fields, sb.header.fields
        )));
    }
    println!("{:<8} {:>24} {:>24}", "field", "linf", "l2");
    for (name, (fa, fb)) in sa
        .header
        .fields
        .iter()
        .zip(sa.fields.iter().zip(&sb.fields))
    {
        println!(
            "{:<8} {:>24.16e} {:>24.16e}",
            name,
            linf_diff(fa, fb)?,
            l2_diff(fa, fb)?
        );
    }
    Ok(EXIT_OK)
}
