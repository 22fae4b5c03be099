//! Transforms, spectral derivatives, the forward-difference operator `T`
//! and the 2/3 mask on a small periodic grid.
//!
//! ```text
//! cargo run --release --example spectral_basics
//! ```

use toda_lab::field::Field;
use toda_lab::fourier::{Axis, Fourier};
use toda_lab::grid::{Grid, DEFAULT_L};

fn max_err(a: &Field, f: impl Fn(f64) -> f64) -> f64 {
    let x = a.grid().x();
    a.values()
        .iter()
        .zip(&x)
        .map(|(v, &x)| (v - f(x)).abs())
        .fold(0.0, f64::max)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new_1d(256, DEFAULT_L)?;
    let fourier = Fourier::new(grid)?;
    println!(
        "domain [-{0:.4}, {0:.4}), N = {1}, dx = {2:.5}, max k = {3}",
        std::f64::consts::PI * grid.lx,
        grid.nx,
        grid.dx(),
        grid.max_kx()
    );

    let gauss = |x: f64| (-x * x).exp();
    let f = Field::from_fn(grid, |x, _| gauss(x));

    let df = fourier.derivative(&f, Axis::X)?;
    println!(
        "d/dx exp(-x^2):           max error {:.2e}",
        max_err(&df, |x| -2.0 * x * gauss(x))
    );

    let shifted = fourier.shift(&f, 0.3, Axis::X)?;
    println!(
        "shift by 0.3:             max error {:.2e}",
        max_err(&shifted, |x| gauss(x + 0.3))
    );

    let eps = 0.1;
    let tf = fourier.apply_t(&f, eps)?;
    println!(
        "T f, eps = {eps}:           max error {:.2e}",
        max_err(&tf, |x| (gauss(x + eps) - gauss(x)) / eps)
    );

    // sin^2 has modes 0 and +-2/L, well inside the mask: dealiasing keeps it.
    let small = Grid::new_1d(16, 1.0)?;
    let fs = Fourier::new(small)?;
    let sq = Field::from_fn(small, |x, _| x.sin().powi(2));
    let mut spec = fs.forward(&sq)?;
    fs.dealias(&mut spec)?;
    let back = fs.inverse(&spec)?;
    println!(
        "dealiased sin^2 on N=16:  max error {:.2e}",
        max_err(&back, |x| 0.5 * (1.0 - (2.0 * x).cos()))
    );
    let kept = fs.mask().keep().iter().filter(|&&k| k).count();
    println!(
        "modes kept by the 2/3 mask on N=16: {kept} of {}",
        fs.mask().keep().len()
    );
    Ok(())
}
