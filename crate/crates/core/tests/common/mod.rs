#![allow(dead_code)]

use std::f64::consts::PI;

use toda_lab::grid::{Grid, DEFAULT_L};

/// Adaptive double-exponential quadrature over `[a, b]`, split into
/// `panels` pieces so oscillatory or localised integrands stay resolved.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            quadrature::integrate(&f, lo, lo + h, 1e-15).integral
        })
        .sum()
}

/// `int f` over the periodic domain `[-pi L, pi L)`.
pub fn integrate_domain(f: impl Fn(f64) -> f64, panels: usize) -> f64 {
    let half = PI * DEFAULT_L;
    integrate(f, -half, half, panels)
}

pub fn grid_1d(log2n: u32) -> Grid {
    Grid::new_1d(1 << log2n, DEFAULT_L).unwrap()
}

pub fn grid_2d(log2nx: u32, log2ny: u32) -> Grid {
    Grid::new_2d(1 << log2nx, 1 << log2ny, DEFAULT_L, DEFAULT_L).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
