//! `phi_1(z) = (e^z - 1)/z` near zero and along the imaginary axis, where
//! it forms the symbol of the forward difference.
//!
//! ```text
//! cargo run --release --example phi1_evaluation
//! ```

use num_complex::Complex64;
use toda_lab::grid::Grid;
use toda_lab::phi::{phi1, phi1_direct, phi1_series, Phi1Table, SERIES_CROSSOVER};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>10} {:>12} {:>12}", "|z|", "|naive-ref|", "|series-ref|");
    for p in [1e-12, 1e-9, 1e-6, 1e-3, 0.1, 0.49] {
        let z = Complex64::new(0.0, p);
        let naive = ((z.exp()) - 1.0) / z;
        let reference = phi1_direct(z);
        println!(
            "{p:>10.0e} {:>12.2e} {:>12.2e}",
            (naive - reference).norm(),
            (phi1_series(z) - reference).norm()
        );
    }
    let z = Complex64::new(0.0, SERIES_CROSSOVER);
    println!(
        "branch gap at |z| = {SERIES_CROSSOVER}: {:.2e}",
        (phi1_series(z) - phi1_direct(z)).norm()
    );
    println!(
        "phi_1(2 pi i) = {:.3e} (zero of the symbol)",
        phi1(Complex64::new(0.0, 2.0 * std::f64::consts::PI)).norm()
    );

    let grid = Grid::new_1d(1 << 14, 5.0)?;
    for eps in [0.1, 0.01] {
        let t = Phi1Table::build(&grid, eps)?;
        println!(
            "eps = {eps}: min |phi_1(i k eps)| = {:.2e} at k = {:.1}",
            t.min_abs(),
            t.argmin_kx()
        );
    }
    let coarse = Grid::new_1d(16, 1.0)?;
    match Phi1Table::build(&coarse, std::f64::consts::FRAC_PI_2) {
        Ok(_) => println!("unexpectedly resolved"),
        Err(e) => println!("resonant table rejected: {e}"),
    }
    Ok(())
}
