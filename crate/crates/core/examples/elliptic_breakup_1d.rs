//! Cusp formation in the 1D elliptic dispersionless Toda system. The run
//! stops once `delta_u` drops below the minimal resolved distance.
//!
//! ```text
//! cargo run --release --example elliptic_breakup_1d [log2 N]
//! ```

use toda_lab::grid::{Grid, DEFAULT_L};
use toda_lab::integrator::{evolve, EvolveConfig};
use toda_lab::models::{energy_drift, InitialData, Model, ModelSpec, Rho};
use toda_lab::singtrack::{TrackMode, Tracker, DEFAULT_CADENCE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let log2n: u32 = std::env::args().nth(1).map_or(Ok(14), |s| s.parse())?;
    let grid = Grid::new_1d(1 << log2n, DEFAULT_L)?;
    let spec = ModelSpec::new(grid, Rho::Elliptic, 0.0, 5e-5)?;
    let model = Model::new(spec)?;
    let state = InitialData::Uini1.build(model.fourier())?;
    let e0 = model.energy(&state)?;

    let mut tracker = Tracker::new(model.fourier().clone(), TrackMode::Elliptic);
    let run = evolve(
        &model,
        state,
        &EvolveConfig::new(0.5, spec.dt, DEFAULT_CADENCE),
        |s, _| tracker.observe(s),
    )?;
    let summary = tracker.summary()?;
    let [u, v] = run.state.physical(model.fourier())?;

    println!(
        "N = 2^{log2n}, dt = {}, Krasny filter {:?}",
        spec.dt, spec.filter
    );
    println!(
        "minimal resolved distance m = {:.3e}",
        grid.min_resolved_distance()
    );
    match summary.detection.time() {
        Some(tc) => println!("t_c = {tc:.4}"),
        None => println!("no cusp detected"),
    }
    if let Some(bu) = summary.b_u {
        println!("B_u(t_c) = {bu:.3}   (a cusp would give 3/2)");
    }
    if let Some(alpha) = summary.alpha {
        println!("|singularity location| = {alpha:.4}");
    }
    println!("max |u| = {:.4}, max |v| = {:.4}", u.max_abs(), v.max_abs());
    println!(
        "energy drift: {:.2e}",
        energy_drift(model.energy(&run.state)?, e0)?
    );
    Ok(())
}
