//! FFT engine and Fourier-multiplier operators.
//!
//! Convention: the forward transform is unnormalized,
//! `c(j) = sum_n u(n) exp(-2 pi i j n / N)`, so `c(0)` is the plain sum of the
//! samples; the inverse carries the `1/N` (`1/(nx ny)` in 2D). Spectra are
//! stored half-complex along x (see [`Spectrum`]). The continuous transform
//! `int u(x) exp(-i k x) dx` about the origin is `dx (-1)^j c(j)` because the
//! grid starts at `x = -pi L`.
//!
//! In 2D the x-direction is transformed row by row (real-to-complex) and then
//! each `k_x` column along y. Both passes run on the rayon pool; every row or
//! column is an independent transform so results do not depend on the
//! thread count.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{DealiasMask, Field, Spectrum};
use crate::grid::{signed_index, Grid};
use crate::phi::phi1;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn from_index(axis: usize, dim: usize) -> Result<Self> {
        match (axis, dim) {
            (0, _) => Ok(Axis::X),
            (1, 2) => Ok(Axis::Y),
            _ => Err(Error::AxisOutOfRange { axis, dim }),
        }
    }
}

/// Transform plans and wavenumber data for one grid.
#[derive(Clone)]
pub struct Fourier {
    grid: Grid,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd_y: Option<Arc<dyn Fft<f64>>>,
    inv_y: Option<Arc<dyn Fft<f64>>>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    mask: DealiasMask,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("grid", &self.grid).finish()
    }
}

impl Fourier {
    pub fn new(grid: Grid) -> Result<Self> {
        grid.validate()?;
        let mut real = RealFftPlanner::<f64>::new();
        let r2c = real.plan_fft_forward(grid.nx);
        let c2r = real.plan_fft_inverse(grid.nx);
        let (fwd_y, inv_y) = if grid.dim() == 2 {
            let mut planner = FftPlanner::<f64>::new();
            (
                Some(planner.plan_fft_forward(grid.ny)),
                Some(planner.plan_fft_inverse(grid.ny)),
            )
        } else {
            (None, None)
        };
        Ok(Fourier {
            grid,
            r2c,
            c2r,
            fwd_y,
            inv_y,
            kx: grid.kx(),
            ky: grid.ky(),
            mask: DealiasMask::new(grid),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Non-negative x-wavenumbers of the half-complex layout.
    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    /// y-wavenumbers in FFT order (`[0]` in 1D).
    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    pub fn mask(&self) -> &DealiasMask {
        &self.mask
    }

    fn check_grid(&self, other: &Grid) -> Result<()> {
        if other != &self.grid {
            return Err(Error::GridMismatch(format!(
                "engine built for {:?}, got {:?}",
                self.grid, other
            )));
        }
        Ok(())
    }

    /// Forward transform; uses the field's cached spectrum when present.
    pub fn forward(&self, field: &Field) -> Result<Spectrum> {
        self.check_grid(field.grid())?;
        if let Some(s) = field.cached_spectrum() {
            return Ok(s.clone());
        }
        field.check_finite()?;
        Ok(self.forward_unchecked(field.values()))
    }

    /// Forward transform of raw samples without the finiteness scan.
    pub fn forward_unchecked(&self, values: &[f64]) -> Spectrum {
        let g = self.grid;
        let nkx = g.nkx();
        let mut out = vec![ZERO; g.spectral_len()];
        if g.dim() == 1 {
            for (src, dst) in values.chunks(g.nx).zip(out.chunks_mut(nkx)) {
                let mut buf = src.to_vec();
                self.r2c
                    .process(&mut buf, dst)
                    .expect("real FFT buffer sizes are fixed by the grid");
            }
        } else {
            let scratch_len = self.r2c.get_scratch_len();
            values
                .par_chunks(g.nx)
                .zip(out.par_chunks_mut(nkx))
                .for_each_init(
                    || (vec![0.0; g.nx], vec![ZERO; scratch_len]),
                    |(buf, scratch), (src, dst)| {
                        buf.copy_from_slice(src);
                        self.r2c
                            .process_with_scratch(buf, dst, scratch)
                            .expect("real FFT buffer sizes are fixed by the grid");
                    },
                );
            self.columns(&mut out, self.fwd_y.as_ref().expect("2D plan"));
        }
        Spectrum::new(g, out).expect("length fixed by the grid")
    }

    /// Inverse transform; the returned field caches `spectrum`.
    pub fn inverse(&self, spectrum: &Spectrum) -> Result<Field> {
        self.check_grid(spectrum.grid())?;
        let values = self.inverse_values(spectrum.coeffs());
        Ok(Field::new(self.grid, values)?.with_spectrum(spectrum.clone()))
    }

    /// Inverse transform of raw half-complex coefficients to samples.
    pub fn inverse_values(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let g = self.grid;
        let nkx = g.nkx();
        let mut work = coeffs.to_vec();
        let mut out = vec![0.0; g.len()];
        let scale = 1.0 / g.len() as f64;
        let inverse_row = |src: &mut [Complex64], dst: &mut [f64]| {
            // c2r requires exactly real DC and Nyquist bins.
            src[0].im = 0.0;
            src[nkx - 1].im = 0.0;
            self.c2r
                .process(src, dst)
                .expect("real FFT buffer sizes are fixed by the grid");
            for v in dst.iter_mut() {
                *v *= scale;
            }
        };
        if g.dim() == 1 {
            inverse_row(&mut work, &mut out);
        } else {
            self.columns(&mut work, self.inv_y.as_ref().expect("2D plan"));
            let scratch_len = self.c2r.get_scratch_len();
            work.par_chunks_mut(nkx)
                .zip(out.par_chunks_mut(g.nx))
                .for_each_init(
                    || vec![ZERO; scratch_len],
                    |scratch, (src, dst)| {
                        src[0].im = 0.0;
                        src[nkx - 1].im = 0.0;
                        self.c2r
                            .process_with_scratch(src, dst, scratch)
                            .expect("real FFT buffer sizes are fixed by the grid");
                        for v in dst.iter_mut() {
                            *v *= scale;
                        }
                    },
                );
        }
        out
    }

    /// Apply a complex FFT along y to every `k_x` column in place.
    fn columns(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let g = self.grid;
        let (nkx, ny) = (g.nkx(), g.ny);
        let mut t = vec![ZERO; data.len()];
        transpose(data, &mut t, ny, nkx);
        let batch = ny * COLUMN_BATCH;
        t.par_chunks_mut(batch).for_each_init(
            || vec![ZERO; plan.get_inplace_scratch_len()],
            |scratch, cols| plan.process_with_scratch(cols, scratch),
        );
        transpose(&t, data, nkx, ny);
    }

    /// Multiplier `i k_x` with the Nyquist bin zeroed.
    pub fn derivative_symbol_x(&self) -> Vec<Complex64> {
        let nyq = self.grid.nx / 2;
        self.kx
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                if i == nyq {
                    ZERO
                } else {
                    Complex64::new(0.0, k)
                }
            })
            .collect()
    }

    /// Multiplier `i k_y` with the Nyquist row zeroed.
    pub fn derivative_symbol_y(&self) -> Vec<Complex64> {
        let ny = self.grid.ny;
        self.ky
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                if ny > 1 && i == ny / 2 {
                    ZERO
                } else {
                    Complex64::new(0.0, k)
                }
            })
            .collect()
    }

    /// Multiplier `exp(i k_x d)` with the Nyquist bin zeroed.
    pub fn shift_symbol_x(&self, distance: f64) -> Vec<Complex64> {
        let nyq = self.grid.nx / 2;
        self.kx
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                if i == nyq {
                    ZERO
                } else {
                    Complex64::from_polar(1.0, k * distance)
                }
            })
            .collect()
    }

    fn shift_symbol_y(&self, distance: f64) -> Vec<Complex64> {
        let ny = self.grid.ny;
        self.ky
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                if ny > 1 && i == ny / 2 {
                    ZERO
                } else {
                    Complex64::from_polar(1.0, k * distance)
                }
            })
            .collect()
    }

    /// Symbol of the forward difference `(f(x+eps) - f(x))/eps`, written as
    /// `i k_x phi_1(i k_x eps)` so small `k_x eps` keeps full precision.
    /// `eps = 0` gives `i k_x`. Nyquist bin zeroed.
    pub fn difference_symbol(&self, epsilon: f64) -> Vec<Complex64> {
        let nyq = self.grid.nx / 2;
        self.kx
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                if i == nyq {
                    ZERO
                } else {
                    Complex64::new(0.0, k) * phi1(Complex64::new(0.0, k * epsilon))
                }
            })
            .collect()
    }

    fn transformed(&self, field: &Field, op: impl FnOnce(&mut Spectrum)) -> Result<Field> {
        let mut s = self.forward(field)?;
        op(&mut s);
        self.inverse(&s)
    }

    pub fn derivative(&self, field: &Field, axis: Axis) -> Result<Field> {
        if axis == Axis::Y && self.grid.dim() != 2 {
            return Err(Error::AxisOutOfRange { axis: 1, dim: 1 });
        }
        self.transformed(field, |s| match axis {
            Axis::X => s.scale_x(&self.derivative_symbol_x()),
            Axis::Y => s.scale_y(&self.derivative_symbol_y()),
        })
    }

    /// Sample `f(x + distance)` (exact for band-limited `f`).
    pub fn shift(&self, field: &Field, distance: f64, axis: Axis) -> Result<Field> {
        if !distance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "shift distance {distance} is not finite"
            )));
        }
        if axis == Axis::Y && self.grid.dim() != 2 {
            return Err(Error::AxisOutOfRange { axis: 1, dim: 1 });
        }
        self.transformed(field, |s| match axis {
            Axis::X => s.scale_x(&self.shift_symbol_x(distance)),
            Axis::Y => s.scale_y(&self.shift_symbol_y(distance)),
        })
    }

    /// `T_eps f = (f(x + eps) - f(x)) / eps`; `eps = 0` is `d/dx`.
    pub fn apply_t(&self, field: &Field, epsilon: f64) -> Result<Field> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        self.transformed(field, |s| s.scale_x(&self.difference_symbol(epsilon)))
    }

    pub fn dealias(&self, spectrum: &mut Spectrum) -> Result<()> {
        self.mask.apply(spectrum)
    }

    /// Signed (k_x index, k_y index) of a half-complex slot.
    pub fn bin(&self, slot: usize) -> (i64, i64) {
        let nkx = self.grid.nkx();
        ((slot % nkx) as i64, signed_index(slot / nkx, self.grid.ny))
    }
}

/// Columns handed to one FFT call in the y pass.
const COLUMN_BATCH: usize = 16;

/// Blocked transpose of a `rows x cols` row-major matrix into `dst`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 32;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_has_only_dc() {
        for g in [
            Grid::new_1d(64, 5.0).unwrap(),
            Grid::new_2d(32, 16, 5.0, 3.0).unwrap(),
        ] {
            let f = Fourier::new(g).unwrap();
            let s = f.forward(&Field::from_fn(g, |_, _| 2.5)).unwrap();
            assert!((s.coeffs()[0].re - 2.5 * g.len() as f64).abs() < 1e-10);
            for c in &s.coeffs()[1..] {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pure_mode_bins() {
        let g = Grid::new_1d(256, 5.0).unwrap();
        let f = Fourier::new(g).unwrap();
        let s = f.forward(&Field::from_fn(g, |x, _| x.sin())).unwrap();
        for (j, c) in s.coeffs().iter().enumerate() {
            if j == 5 {
                assert!((c.norm() - 128.0).abs() < 1e-10);
            } else {
                assert!(c.norm() < 1e-11, "bin {j}: {c}");
            }
        }
    }

    #[test]
    fn round_trip_2d() {
        let g = Grid::new_2d(64, 32, 5.0, 5.0).unwrap();
        let f = Fourier::new(g).unwrap();
        let field = Field::from_fn(g, |x, y| {
            (-(x * x + 2.0 * y * y)).exp() + 0.3 * (x / 5.0).sin()
        });
        let back = f.inverse_values(f.forward(&field).unwrap().coeffs());
        let scale = field.max_abs();
        assert!(max_diff(&back, field.values()) <= 1e-13 * scale);
    }

    #[test]
    fn derivative_of_sine() {
        let g = Grid::new_1d(256, 5.0).unwrap();
        let f = Fourier::new(g).unwrap();
        let d = f
            .derivative(&Field::from_fn(g, |x, _| x.sin()), Axis::X)
            .unwrap();
        let exact = g.sample(|x, _| x.cos());
        assert!(max_diff(d.values(), &exact) < 1e-12);
        let d0 = f
            .derivative(&Field::from_fn(g, |_, _| 4.0), Axis::X)
            .unwrap();
        assert!(d0.max_abs() < 1e-13);
    }

    #[test]
    fn derivative_axis_errors() {
        let g = Grid::new_1d(16, 5.0).unwrap();
        let f = Fourier::new(g).unwrap();
        assert!(matches!(
            f.derivative(&Field::zeros(g), Axis::Y),
            Err(Error::AxisOutOfRange { .. })
        ));
        assert!(Axis::from_index(1, 1).is_err());
        assert!(Axis::from_index(2, 2).is_err());
        assert_eq!(Axis::from_index(1, 2).unwrap(), Axis::Y);
    }

    #[test]
    fn y_derivative_and_shift() {
        let g = Grid::new_2d(32, 256, 5.0, 5.0).unwrap();
        let f = Fourier::new(g).unwrap();
        let field = Field::from_fn(g, |x, y| (0.2 * x).cos() * (-(y * y)).exp());
        let dy = f.derivative(&field, Axis::Y).unwrap();
        let exact = g.sample(|x, y| -2.0 * y * (0.2 * x).cos() * (-(y * y)).exp());
        assert!(max_diff(dy.values(), &exact) < 1e-10);
        let sh = f.shift(&field, 0.3, Axis::Y).unwrap();
        let exact = g.sample(|x, y| (0.2 * x).cos() * (-((y + 0.3) * (y + 0.3))).exp());
        assert!(max_diff(sh.values(), &exact) < 1e-10);
    }

    #[test]
    fn shift_sine_to_cosine() {
        let g = Grid::new_1d(256, 5.0).unwrap();
        let f = Fourier::new(g).unwrap();
        let s = Field::from_fn(g, |x, _| x.sin());
        let shifted = f.shift(&s, PI / 2.0, Axis::X).unwrap();
        assert!(max_diff(shifted.values(), &g.sample(|x, _| x.cos())) < 1e-12);
        let same = f.shift(&s, 0.0, Axis::X).unwrap();
        assert!(max_diff(same.values(), s.values()) < 1e-15);
        assert!(f.shift(&s, f64::NAN, Axis::X).is_err());
    }

    #[test]
    fn difference_operator_on_sine() {
        let g = Grid::new_1d(256, 5.0).unwrap();
        let f = Fourier::new(g).unwrap();
        let t = f.apply_t(&Field::from_fn(g, |x, _| x.sin()), 0.5).unwrap();
        let exact = g.sample(|x, _| ((x + 0.5).sin() - x.sin()) / 0.5);
        assert!(max_diff(t.values(), &exact) < 1e-12);
        let t0 = f.apply_t(&Field::from_fn(g, |_, _| 1.0), 0.5).unwrap();
        assert!(t0.max_abs() < 1e-14);
        assert!(f.apply_t(&Field::zeros(g), -0.1).is_err());
    }

    #[test]
    fn dealiased_square_is_exact() {
        let g = Grid::new_1d(16, 1.0).unwrap();
        let f = Fourier::new(g).unwrap();
        let s = f.forward(&Field::from_fn(g, |x, _| x.sin())).unwrap();
        let phys = f.inverse(&s).unwrap();
        let sq: Vec<f64> = phys.values().iter().map(|v| v * v).collect();
        let mut p = f.forward_unchecked(&sq);
        f.dealias(&mut p).unwrap();
        let exact = f.forward_unchecked(&g.sample(|x, _| 0.5 * (1.0 - (2.0 * x).cos())));
        for (a, b) in p.coeffs().iter().zip(exact.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
        assert!((p.coeffs()[0].re - 8.0).abs() < 1e-13);
        assert!((p.coeffs()[2].re + 4.0).abs() < 1e-13);
    }

    #[test]
    fn non_finite_rejected() {
        let g = Grid::new_1d(16, 1.0).unwrap();
        let f = Fourier::new(g).unwrap();
        let mut field = Field::zeros(g);
        field.values_mut()[7] = f64::INFINITY;
        assert!(matches!(
            f.forward(&field),
            Err(Error::NonFinite { index: 7, .. })
        ));
    }

    #[test]
    fn grid_mismatch_rejected() {
        let f = Fourier::new(Grid::new_1d(16, 1.0).unwrap()).unwrap();
        let other = Field::zeros(Grid::new_1d(32, 1.0).unwrap());
        assert!(matches!(f.forward(&other), Err(Error::GridMismatch(_))));
    }
}
