//! The decay fit `ln|c_k| = A - B ln k - delta k` and the oscillation-period
//! estimate of the singularity location on synthetic spectra.
//!
//! ```text
//! cargo run --release --example fourier_fit
//! ```

use toda_lab::singtrack::{estimate_alpha, fit_decay, AxisSpectrum, KWindow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: Vec<f64> = (1..2000).map(|j| j as f64 / 5.0).collect();
    let window = KWindow::standard(k.len() as f64 / 5.0);
    let (a, b, delta, alpha) = (0.3, 4.0 / 3.0, 0.02, 1.58);

    let smooth: Vec<f64> = k
        .iter()
        .map(|&k| (a - b * k.ln() - delta * k).exp())
        .collect();
    let fit = fit_decay(&AxisSpectrum::from_magnitudes(k.clone(), &smooth), window)?;
    println!(
        "exact model:   A = {:.6}, B = {:.6}, delta = {:.6}",
        fit.a, fit.b, fit.delta
    );
    println!(
        "               residual {:.1e} over {} points",
        fit.residual, fit.points
    );

    // |cos(alpha k)| modulation: the real part of a pair of conjugate poles
    let oscillating: Vec<f64> = k
        .iter()
        .zip(&smooth)
        .map(|(&k, m)| m * (alpha * k).cos().abs().max(1e-3))
        .collect();
    let spectrum = AxisSpectrum::from_magnitudes(k, &oscillating);
    let fit = fit_decay(&spectrum, window)?;
    println!("with notches:  B = {:.3}, delta = {:.4}", fit.b, fit.delta);
    println!(
        "alpha estimate {:.4} (true {alpha})",
        estimate_alpha(&spectrum, window)?
    );
    Ok(())
}
