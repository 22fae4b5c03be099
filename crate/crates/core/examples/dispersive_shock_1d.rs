//! The 1D hyperbolic Toda equation with `eps = 0.1` well past the
//! dispersionless break-up: a dispersive shock forms while the energy is
//! conserved to round-off.
//!
//! ```text
//! cargo run --release --example dispersive_shock_1d [eps] [t_end]
//! ```

use toda_lab::grid::{Grid, DEFAULT_L};
use toda_lab::integrator::{evolve, Control, EvolveConfig};
use toda_lab::models::{energy_drift, InitialData, Model, ModelSpec, Rho};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().map_or(Ok(0.1), |s| s.parse())?;
    let t_end: f64 = args.next().map_or(Ok(3.0), |s| s.parse())?;
    let grid = Grid::new_1d(1 << 14, DEFAULT_L)?;
    let spec = ModelSpec::new(grid, Rho::Hyperbolic, eps, 3e-4)?;
    let model = Model::new(spec)?;
    let state = InitialData::Uini1.build(model.fourier())?;
    let e0 = model.energy(&state)?;

    let mut drifts = Vec::new();
    let run = evolve(
        &model,
        state,
        &EvolveConfig::new(t_end, spec.dt, 500),
        |s, info| {
            if let Ok(e) = model.energy(s) {
                drifts.push((info.t, e / e0 - 1.0));
            }
            Control::Continue
        },
    )?;
    println!("eps = {eps}, N = 2^14, dt = {}", spec.dt);
    for (t, d) in &drifts {
        println!("t = {t:6.3}  energy drift {d:+.2e}");
    }
    let u = run.state.u_field(model.fourier())?;
    // local extrema of u where the solution is not yet flat: the wave train
    let ux = model.fourier().derivative(&u, toda_lab::fourier::Axis::X)?;
    let turns = ux
        .values()
        .windows(2)
        .zip(u.values())
        .filter(|(w, &u)| u.abs() > 1e-3 && w[0].signum() != w[1].signum())
        .count();
    println!("{:?} at t = {}", run.termination, run.state.t());
    println!("local extrema of u with |u| > 1e-3: {turns}");
    println!(
        "final energy drift: {:.2e}",
        energy_drift(model.energy(&run.state)?, e0)?
    );
    Ok(())
}
