//! Gradient catastrophe of the 1D hyperbolic dispersionless Toda system.
//!
//! Evolves `u0 = -2x exp(-x^2)`, `v0 = 0` and tracks the Fourier decay rate
//! `delta_u` until it crosses zero.
//!
//! ```text
//! cargo run --release --example hyperbolic_breakup_1d [log2 N]
//! ```

use toda_lab::grid::{Grid, DEFAULT_L};
use toda_lab::integrator::{evolve, EvolveConfig};
use toda_lab::models::{energy_drift, InitialData, Model, ModelSpec, Rho};
use toda_lab::singtrack::{TrackMode, Tracker};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let log2n: u32 = std::env::args().nth(1).map_or(Ok(14), |s| s.parse())?;
    let grid = Grid::new_1d(1 << log2n, DEFAULT_L)?;
    let spec = ModelSpec::new(grid, Rho::Hyperbolic, 0.0, 3e-4)?;
    let model = Model::new(spec)?;
    let state = InitialData::Uini1.build(model.fourier())?;
    let e0 = model.energy(&state)?;

    let mut tracker = Tracker::new(model.fourier().clone(), TrackMode::Hyperbolic);
    let run = evolve(
        &model,
        state,
        // sample every step: B_u(t_c) is interpolated between samples
        &EvolveConfig::new(2.5, spec.dt, 1),
        |s, _| tracker.observe(s),
    )?;
    let summary = tracker.summary()?;
    let drift = energy_drift(model.energy(&run.state)?, e0)?;

    println!("N = 2^{log2n}, dt = {}", spec.dt);
    println!(
        "stopped at t = {:.5} ({:?})",
        run.state.t(),
        run.termination
    );
    match summary.detection.time() {
        Some(tc) => println!("t_c = {tc:.4}"),
        None => println!("no break-up detected"),
    }
    if let (Some(bu), Some(bv)) = (summary.b_u, summary.b_v) {
        println!("B_u(t_c) = {bu:.4}, B_v(t_c) = {bv:.4}   (cubic: 4/3)");
    }
    if let Some(alpha) = summary.alpha {
        println!("singularity location alpha = {alpha:.4}");
    }
    println!("energy drift at stop: {drift:.2e}");
    Ok(())
}
