mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use toda_lab::field::Field;
use toda_lab::fourier::{Axis, Fourier};
use toda_lab::grid::Grid;
use toda_lab::models::{uini1, InitialData, State};
use toda_lab::singtrack::axis_spectrum;

use common::{grid_1d, grid_2d, integrate_domain, max_abs_diff};

fn u0_prime(x: f64) -> f64 {
    (-2.0 + 4.0 * x * x) * (-x * x).exp()
}

#[test]
fn forward_transform_matches_quadrature() {
    let grid = grid_1d(10);
    let fourier = Fourier::new(grid).unwrap();
    let s = fourier
        .forward(&Field::from_fn(grid, |x, _| uini1(x)))
        .unwrap();
    let cell = grid.cell();
    let mut worst: f64 = 0.0;
    // k = j / L up to 10
    for j in 0..=50usize {
        let k = j as f64 / grid.lx;
        let re = integrate_domain(|x| uini1(x) * (k * x).cos(), 40);
        let im = -integrate_domain(|x| uini1(x) * (k * x).sin(), 40);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let c = s.coeffs()[j] * (cell * sign);
        worst = worst.max((c - Complex64::new(re, im)).norm());
    }
    assert!(worst <= 1e-10, "worst coefficient error {worst:e}");
}

#[test]
fn spectral_derivative_of_u0() {
    let grid = grid_1d(10);
    let fourier = Fourier::new(grid).unwrap();
    let d = fourier
        .derivative(&Field::from_fn(grid, |x, _| uini1(x)), Axis::X)
        .unwrap();
    let exact = Field::from_fn(grid, |x, _| u0_prime(x));
    let err = max_abs_diff(d.values(), exact.values());
    assert!(err <= 1e-10, "{err:e}");
}

#[test]
fn shift_of_u0() {
    let grid = grid_1d(12);
    let fourier = Fourier::new(grid).unwrap();
    let s = fourier
        .shift(&Field::from_fn(grid, |x, _| uini1(x)), 0.1, Axis::X)
        .unwrap();
    let exact = Field::from_fn(grid, |x, _| uini1(x + 0.1));
    let err = max_abs_diff(s.values(), exact.values());
    assert!(err <= 1e-10, "{err:e}");
}

#[test]
fn difference_operator_on_sine() {
    let grid = grid_1d(6);
    let fourier = Fourier::new(grid).unwrap();
    let eps = 0.5;
    let t = fourier
        .apply_t(&Field::from_fn(grid, |x, _| x.sin()), eps)
        .unwrap();
    let exact = Field::from_fn(grid, |x, _| ((x + eps).sin() - x.sin()) / eps);
    let err = max_abs_diff(t.values(), exact.values());
    assert!(err <= 1e-12, "{err:e}");
}

#[test]
fn difference_operator_tends_to_derivative_linearly() {
    let grid = grid_1d(10);
    let fourier = Fourier::new(grid).unwrap();
    let u = Field::from_fn(grid, |x, _| uini1(x));
    let du = fourier.apply_t(&u, 0.0).unwrap();
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&eps| {
            let t = fourier.apply_t(&u, eps).unwrap();
            max_abs_diff(t.values(), du.values())
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (ratio - 2.0).abs() <= 0.15 * 2.0,
            "ratio {ratio}, errors {errs:?}"
        );
    }
}

#[test]
fn difference_operator_at_zero_is_derivative() {
    let grid = grid_1d(10);
    let fourier = Fourier::new(grid).unwrap();
    let u = Field::from_fn(grid, |x, _| uini1(x));
    let a = fourier.apply_t(&u, 0.0).unwrap();
    let b = fourier.derivative(&u, Axis::X).unwrap();
    assert_eq!(a.values(), b.values());
}

#[test]
fn dealiased_square_of_sine() {
    // L = 1: sin x sits at bin 1, sin^2 at bins 0 and 2, all retained.
    let grid = Grid::new_1d(16, 1.0).unwrap();
    let fourier = Fourier::new(grid).unwrap();
    let mut s = fourier
        .forward(&Field::from_fn(grid, |x, _| x.sin().powi(2)))
        .unwrap();
    fourier.dealias(&mut s).unwrap();
    let n = grid.nx as f64;
    // (1 - cos 2x)/2 with the unnormalised forward transform
    for (j, c) in s.coeffs().iter().enumerate() {
        let expected = match j {
            0 => n / 2.0,
            2 => -n / 4.0,
            _ => 0.0,
        };
        assert!(
            (c - Complex64::new(expected, 0.0)).norm() <= 1e-13,
            "bin {j}: {c}"
        );
    }
}

#[test]
fn dealiasing_removes_aliased_product_mode() {
    // L = 5: sin x sits at bin 5; the 2x harmonic (bin 10) aliases onto
    // bin 6 of a 16-point grid, which the 2/3 rule removes.
    let grid = grid_1d(4);
    let fourier = Fourier::new(grid).unwrap();
    let mut s = fourier
        .forward(&Field::from_fn(grid, |x, _| x.sin().powi(2)))
        .unwrap();
    assert!(s.coeffs()[6].norm() > 1.0);
    fourier.dealias(&mut s).unwrap();
    for (j, c) in s.coeffs().iter().enumerate() {
        let expected = if j == 0 { 8.0 } else { 0.0 };
        assert!(
            (c - Complex64::new(expected, 0.0)).norm() <= 1e-13,
            "bin {j}: {c}"
        );
    }
}

#[test]
fn gaussian_axis_spectrum() {
    let grid = grid_1d(10);
    let fourier = Fourier::new(grid).unwrap();
    let s = fourier
        .forward(&Field::from_fn(grid, |x, _| (-x * x).exp()))
        .unwrap();
    let axis = axis_spectrum(&s);
    let mut logs = Vec::new();
    for (&k, c) in axis.k.iter().zip(&axis.coeffs) {
        if k > 20.0 {
            break;
        }
        let exact = PI.sqrt() * (-k * k / 4.0).exp();
        assert!((c.norm() - exact).abs() <= 1e-8, "k = {k}");
        if c.norm() > 1e-10 {
            logs.push(c.norm().ln());
        }
    }
    assert!(logs.len() > 20);
    for w in logs.windows(3) {
        assert!(w[0] - 2.0 * w[1] + w[2] < 0.0);
    }
}

#[test]
fn sine_spectrum_is_one_bin() {
    let grid = grid_1d(8);
    let fourier = Fourier::new(grid).unwrap();
    let axis = axis_spectrum(
        &fourier
            .forward(&Field::from_fn(grid, |x, _| x.sin()))
            .unwrap(),
    );
    let mags = axis.magnitudes();
    let (imax, _) = mags.iter().enumerate().fold(
        (0, 0.0),
        |(i0, m0), (i, &m)| if m > m0 { (i, m) } else { (i0, m0) },
    );
    assert_eq!(axis.k[imax], 1.0);
    let rest = mags
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != imax)
        .map(|(_, m)| *m)
        .fold(0.0, f64::max);
    assert!(rest < 1e-12 * mags[imax]);
}

#[test]
fn gaussian_2d_slice_is_separable() {
    let grid = grid_2d(9, 7);
    let fourier = Fourier::new(grid).unwrap();
    let State::TwoD(s) = InitialData::Uini2.build(&fourier).unwrap() else {
        panic!("expected a 2D state");
    };
    let axis = axis_spectrum(&s.potential);
    // int exp(-y^2) dy over the domain equals sqrt(pi) to round-off
    let y_factor = PI.sqrt();
    for (&k, c) in axis.k.iter().zip(&axis.coeffs) {
        let exact = PI.sqrt() * (-k * k / 4.0).exp() * y_factor;
        assert!((c.norm() - exact).abs() <= 1e-8, "k = {k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn forward_inverse_round_trip(values in prop::collection::vec(-10.0f64..10.0, 64)) {
        let grid = Grid::new_1d(64, 5.0).unwrap();
        let fourier = Fourier::new(grid).unwrap();
        let f = Field::new(grid, values).unwrap();
        let back = fourier.inverse(&fourier.forward(&f).unwrap()).unwrap();
        prop_assert!(max_abs_diff(f.values(), back.values()) <= 1e-12);
    }

    #[test]
    fn round_trip_2d(values in prop::collection::vec(-1.0f64..1.0, 32 * 8)) {
        let grid = Grid::new_2d(32, 8, 5.0, 2.0).unwrap();
        let fourier = Fourier::new(grid).unwrap();
        let f = Field::new(grid, values).unwrap();
        let back = fourier.inverse(&fourier.forward(&f).unwrap()).unwrap();
        prop_assert!(max_abs_diff(f.values(), back.values()) <= 1e-13);
    }

    #[test]
    fn shift_of_trig_polynomial(a in -1.0f64..1.0, b in -1.0f64..1.0, d in -3.0f64..3.0) {
        let grid = Grid::new_1d(64, 5.0).unwrap();
        let fourier = Fourier::new(grid).unwrap();
        let f = |x: f64| a * (0.6 * x).sin() + b * (2.2 * x).cos();
        let s = fourier.shift(&Field::from_fn(grid, |x, _| f(x)), d, Axis::X).unwrap();
        let exact = Field::from_fn(grid, |x, _| f(x + d));
        prop_assert!(max_abs_diff(s.values(), exact.values()) <= 1e-12);
    }
}
