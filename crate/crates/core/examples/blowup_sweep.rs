//! Blow-up times of the 1D elliptic Toda equation for small dispersion and
//! their approach to the dispersionless break-up time.
//!
//! ```text
//! cargo run --release --example blowup_sweep [jobs] [eps,eps,...]
//! ```

use toda_lab::analysis::{default_epsilons, run_blowup_sweep, BlowupSetup, SweepSetup};
use toda_lab::grid::{Grid, DEFAULT_L};
use toda_lab::models::{InitialData, ModelSpec, Rho};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let jobs = args.next().map_or(Ok(1), |s| s.parse())?;
    let epsilons = match args.next() {
        Some(list) => list
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<f64>, _>>()?,
        None => default_epsilons(),
    };
    let grid = Grid::new_1d(1 << 14, DEFAULT_L)?;
    let t_c = 0.3050;
    let sweep = run_blowup_sweep(&BlowupSetup {
        sweep: SweepSetup {
            base: ModelSpec::new(grid, Rho::Elliptic, 0.0, 5e-5)?,
            initial: InitialData::Uini1,
            t_c,
            epsilons,
            jobs,
        },
        t_max: 0.6,
        cadence: 1,
    })?;
    println!("{:>6} {:>8} {:>10}", "eps", "t*", "t* - t_c");
    for r in &sweep.records {
        let ts = r.t_star.unwrap_or(f64::NAN);
        println!("{:>6.3} {:>8.4} {:>10.4}", r.epsilon, ts, ts - t_c);
    }
    for x in &sweep.excluded {
        println!("{:>6.3} excluded: {}", x.epsilon, x.reason);
    }
    println!(
        "t* - t_c ~ eps^{:.3}  (r = {:.4})",
        sweep.result.a, sweep.result.r
    );
    Ok(())
}
