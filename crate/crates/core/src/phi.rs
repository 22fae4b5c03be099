//! The first exponential-integrator function `phi_1(z) = (e^z - 1)/z`.
//!
//! Near `z = 0` the quotient loses all significant digits to cancellation.
//! Below `|z| = 0.5` a 17-term Taylor series is summed (truncation below
//! `1e-17`); above it the numerator is formed with `expm1` so that the real
//! part `e^a cos b - 1` never cancels either.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// `|z|` below which the Taylor series is used.
pub const SERIES_CROSSOVER: f64 = 0.5;

/// Number of Taylor terms `z^n / (n+1)!`, `n = 0..SERIES_TERMS`.
pub const SERIES_TERMS: usize = 17;

/// Smallest `|phi_1|` a table may contain before `1/phi_1` is refused.
pub const RECIPROCAL_GUARD: f64 = 1e-6;

pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_CROSSOVER {
        phi1_series(z)
    } else {
        phi1_direct(z)
    }
}

/// Truncated Taylor series, Horner form.
pub fn phi1_series(z: Complex64) -> Complex64 {
    // 1/(n+1)! for n = 0..SERIES_TERMS
    let mut coef = [0.0f64; SERIES_TERMS];
    let mut fact = 1.0;
    for (n, c) in coef.iter_mut().enumerate() {
        fact *= (n + 1) as f64;
        *c = 1.0 / fact;
    }
    coef.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// `(e^z - 1)/z` with a cancellation-free numerator.
pub fn phi1_direct(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    let em1 = a.exp_m1();
    let half = (0.5 * b).sin();
    let re = em1 * b.cos() - 2.0 * half * half;
    let im = a.exp() * b.sin();
    Complex64::new(re, im) / z
}

/// `phi_1(i k_x eps)` over the non-negative x-wavenumbers of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi1Table {
    values: Vec<Complex64>,
    min_abs: f64,
    argmin_kx: f64,
}

impl Phi1Table {
    pub fn build(grid: &Grid, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "phi_1 table needs epsilon > 0, got {epsilon}"
            )));
        }
        let kx = grid.kx();
        let values: Vec<Complex64> = kx
            .iter()
            .map(|&k| phi1(Complex64::new(0.0, k * epsilon)))
            .collect();
        let (imin, min_abs) = values.iter().map(|v| v.norm()).enumerate().fold(
            (0, f64::INFINITY),
            |(i0, m0), (i, m)| {
                if m < m0 {
                    (i, m)
                } else {
                    (i0, m0)
                }
            },
        );
        let table = Phi1Table {
            values,
            min_abs,
            argmin_kx: kx[imin],
        };
        if min_abs < RECIPROCAL_GUARD {
            return Err(Error::NearResonance {
                kx: table.argmin_kx,
                min_abs,
            });
        }
        Ok(table)
    }

    /// The `epsilon = 0` table, identically one.
    pub fn unit(grid: &Grid) -> Self {
        Phi1Table {
            values: vec![Complex64::new(1.0, 0.0); grid.nkx()],
            min_abs: 1.0,
            argmin_kx: 0.0,
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn min_abs(&self) -> f64 {
        self.min_abs
    }

    /// Wavenumber where `|phi_1|` is smallest.
    pub fn argmin_kx(&self) -> f64 {
        self.argmin_kx
    }

    pub fn reciprocal(&self) -> Vec<Complex64> {
        self.values.iter().map(|v| v.inv()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn removable_singularity() {
        assert_eq!(phi1(c(0.0, 0.0)), c(1.0, 0.0));
    }

    #[test]
    fn half_turn() {
        let v = phi1(c(0.0, PI));
        assert!((v.re).abs() < 1e-16);
        assert!((v.im - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn conjugate_symmetry() {
        for &(a, b) in &[
            (0.1, 0.2),
            (-1.0, 3.0),
            (0.49, -0.01),
            (5.0, 7.0),
            (-20.0, 1.0),
        ] {
            let z = c(a, b);
            let d = phi1(z.conj()) - phi1(z).conj();
            assert!(d.norm() <= 1e-16 * phi1(z).norm());
        }
    }

    #[test]
    fn imaginary_axis_bounded_by_one() {
        for i in 1..2000 {
            let y = i as f64 * 0.05 - 50.0;
            if y == 0.0 {
                continue;
            }
            assert!(phi1(c(0.0, y)).norm() < 1.0, "y = {y}");
        }
    }

    #[test]
    fn table_unit_at_zero_wavenumber() {
        let g = Grid::new_1d(1 << 14, 5.0).unwrap();
        let t = Phi1Table::build(&g, 0.1).unwrap();
        assert_eq!(t.values()[0], c(1.0, 0.0));
        assert!(t.min_abs() > 0.0);
        for (k, v) in g.kx().iter().zip(t.values()) {
            assert_eq!(*v, phi1(c(0.0, k * 0.1)));
        }
    }

    #[test]
    fn table_detects_resonance() {
        // L = 1 makes k_x = j; eps = 2 pi / 4 puts j = 4 on the zero of phi_1.
        let g = Grid::new_1d(16, 1.0).unwrap();
        match Phi1Table::build(&g, 2.0 * PI / 4.0) {
            Err(Error::NearResonance { kx, .. }) => assert_eq!(kx, 4.0),
            other => panic!("expected resonance error, got {other:?}"),
        }
        assert!(Phi1Table::build(&g, 0.0).is_err());
    }
}
