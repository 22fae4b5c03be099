//! Write a state to a snapshot, read it back bit for bit, resume the run,
//! and export a tracker series as CSV.
//!
//! ```text
//! cargo run --release --example snapshot_io [dir]
//! ```

use std::path::PathBuf;

use toda_lab::grid::{Grid, DEFAULT_L};
use toda_lab::integrator::{evolve, EvolveConfig};
use toda_lab::io::{read_series, read_snapshot, write_series, write_snapshot, Snapshot};
use toda_lab::models::{InitialData, Model, ModelSpec, Rho};
use toda_lab::singtrack::{TrackMode, Tracker};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map_or_else(std::env::temp_dir, PathBuf::from);
    let grid = Grid::new_1d(1 << 12, DEFAULT_L)?;
    let spec = ModelSpec::new(grid, Rho::Hyperbolic, 0.05, 3e-4)?;
    let model = Model::new(spec)?;
    let state = InitialData::Uini1.build(model.fourier())?;

    let mut tracker = Tracker::new(model.fourier().clone(), TrackMode::Hyperbolic).keep_running();
    let half = evolve(
        &model,
        state,
        &EvolveConfig::new(0.6, spec.dt, 25),
        |s, _| tracker.observe(s),
    )?;
    let path = dir.join("toda_half.bin");
    let snap = Snapshot::from_state(&spec, &half.state, model.fourier())?;
    write_snapshot(&path, &snap)?;
    let back = read_snapshot(&path)?;
    let identical = snap.fields.iter().zip(&back.fields).all(|(a, b)| {
        a.values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| x.to_bits() == y.to_bits())
    });
    println!(
        "wrote {} ({} bytes of payload), bit-identical on reread: {identical}",
        path.display(),
        back.header.payload_len()
    );

    let resumed = back.to_state(model.fourier())?;
    let rest = evolve(
        &model,
        resumed,
        &EvolveConfig::new(1.2, spec.dt, 25),
        |s, _| tracker.observe(s),
    )?;
    println!(
        "resumed from t = {} to t = {}",
        back.header.time,
        rest.state.t()
    );

    let csv = dir.join("toda_series.csv");
    write_series(&csv, tracker.series())?;
    let series = read_series(&csv, grid.min_resolved_distance())?;
    println!(
        "{} tracker samples in {}, exact round trip: {}",
        series.len(),
        csv.display(),
        series == *tracker.series()
    );
    Ok(())
}
