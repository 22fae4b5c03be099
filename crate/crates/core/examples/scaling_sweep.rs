//! Distance between dispersive and dispersionless 1D solutions at the
//! dispersionless break-up time, as a power of epsilon.
//!
//! ```text
//! cargo run --release --example scaling_sweep [hyperbolic|elliptic] [jobs]
//! ```

use toda_lab::analysis::{
    default_epsilons, hyperbolic_epsilons, run_scaling_experiment, SweepSetup,
};
use toda_lab::grid::{Grid, DEFAULT_L};
use toda_lab::models::{InitialData, ModelSpec, Rho};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let which = args.next().unwrap_or_else(|| "hyperbolic".into());
    let jobs = args.next().map_or(Ok(1), |s| s.parse())?;
    let grid = Grid::new_1d(1 << 14, DEFAULT_L)?;
    let (base, t_c, epsilons) = match which.as_str() {
        "hyperbolic" => (
            ModelSpec::new(grid, Rho::Hyperbolic, 0.0, 3e-4)?,
            1.717,
            hyperbolic_epsilons(),
        ),
        "elliptic" => (
            ModelSpec::new(grid, Rho::Elliptic, 0.0, 5e-5)?,
            0.3050,
            default_epsilons(),
        ),
        other => return Err(format!("unknown system {other}").into()),
    };
    let sweep = run_scaling_experiment(&SweepSetup {
        base,
        initial: InitialData::Uini1,
        t_c,
        epsilons,
        jobs,
    })?;
    println!("{which}, t_c = {t_c}");
    println!("{:>8} {:>14}", "eps", "delta_inf");
    for r in &sweep.records {
        println!(
            "{:>8.4} {:>14.6e}",
            r.epsilon,
            r.delta_inf.unwrap_or(f64::NAN)
        );
    }
    for x in &sweep.excluded {
        println!("{:>8.4} excluded: {}", x.epsilon, x.reason);
    }
    let fit = &sweep.result;
    println!(
        "log10 delta_inf = {:.4} log10 eps + {:.4}, r = {:.5}",
        fit.a, fit.b, fit.r
    );
    Ok(())
}
