//! Break-up in the 2D dispersionless Toda system for `U(x, y, 0)` whose
//! x-derivative is the 1D initial profile times a Gaussian in y.
//!
//! ```text
//! cargo run --release --example breakup_2d [hyperbolic|elliptic] [log2 nx] [log2 ny] [dt]
//! ```

use toda_lab::grid::{Grid, DEFAULT_L};
use toda_lab::integrator::{evolve, EvolveConfig};
use toda_lab::models::{energy_drift, InitialData, Model, ModelSpec, Rho};
use toda_lab::singtrack::{TrackMode, Tracker, DEFAULT_CADENCE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let (rho, mode, t_end) = match args.next().as_deref().unwrap_or("hyperbolic") {
        "hyperbolic" => (Rho::Hyperbolic, TrackMode::Hyperbolic, 3.0),
        "elliptic" => (Rho::Elliptic, TrackMode::Elliptic, 0.5),
        other => return Err(format!("unknown system {other}").into()),
    };
    let log2nx: u32 = args.next().map_or(Ok(12), |s| s.parse())?;
    let log2ny: u32 = args.next().map_or(Ok(8), |s| s.parse())?;
    let default_dt = if rho == Rho::Hyperbolic { 8e-4 } else { 5e-5 };
    let dt: f64 = args.next().map_or(Ok(default_dt), |s| s.parse())?;

    let grid = Grid::new_2d(1 << log2nx, 1 << log2ny, DEFAULT_L, DEFAULT_L)?;
    let model = Model::new(ModelSpec::new(grid, rho, 0.0, dt)?)?;
    let state = InitialData::Uini2.build(model.fourier())?;
    let e0 = model.energy(&state)?;

    let mut tracker = Tracker::new(model.fourier().clone(), mode);
    let run = evolve(
        &model,
        state,
        &EvolveConfig::new(t_end, dt, DEFAULT_CADENCE),
        |s, _| tracker.observe(s),
    )?;
    let summary = tracker.summary()?;
    println!("{:?}, {}x{} modes, dt = {dt}", rho, grid.nx, grid.ny);
    println!(
        "stopped at t = {:.5} ({:?})",
        run.state.t(),
        run.termination
    );
    match summary.detection.time() {
        Some(tc) => println!("t_c = {tc:.4}"),
        None => println!("no break-up detected"),
    }
    if let Some(bu) = summary.b_u {
        println!("B_u(t_c) = {bu:.4}");
    }
    if let Some(alpha) = summary.alpha {
        println!("alpha = {alpha:.4}");
    }
    println!(
        "energy drift: {:.2e}",
        energy_drift(model.energy(&run.state)?, e0)?
    );
    Ok(())
}
