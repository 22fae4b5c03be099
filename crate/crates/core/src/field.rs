//! Physical fields, half-complex spectra and the 2/3 dealiasing mask.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{signed_index, Grid};

/// Real samples on a grid, row-major with x contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    spectrum: Option<Spectrum>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Field {
            grid,
            values,
            spectrum: None,
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.len()],
            spectrum: None,
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        Field {
            values: grid.sample(f),
            grid,
            spectrum: None,
        }
    }

    /// Attach a spectrum known to belong to these values.
    pub(crate) fn with_spectrum(mut self, spectrum: Spectrum) -> Self {
        debug_assert_eq!(spectrum.grid(), &self.grid);
        self.spectrum = Some(spectrum);
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access drops any cached spectrum.
    pub fn values_mut(&mut self) -> &mut [f64] {
        self.spectrum = None;
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn cached_spectrum(&self) -> Option<&Spectrum> {
        self.spectrum.as_ref()
    }

    /// Value at grid point `(ix, iy)`.
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.nx + ix]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The x-line `y = y[iy]`.
    pub fn row(&self, iy: usize) -> &[f64] {
        let nx = self.grid.nx;
        &self.values[iy * nx..(iy + 1) * nx]
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite {
                index,
                value: self.values[index],
            }),
            None => Ok(()),
        }
    }
}

/// Half-complex spectrum: `ny` rows (all `k_y` in FFT order) of `nx/2 + 1`
/// non-negative `k_x` entries. Negative `k_x` follow from Hermitian symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.spectral_len() {
            return Err(Error::ShapeMismatch {
                expected: grid.spectral_len(),
                found: coeffs.len(),
            });
        }
        Ok(Spectrum { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Spectrum {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.spectral_len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at x-bin `ikx` (0..=nx/2) and y-bin `iky` (FFT order).
    pub fn at(&self, ikx: usize, iky: usize) -> Complex64 {
        self.coeffs[iky * self.grid.nkx() + ikx]
    }

    /// The `k_y = 0` row.
    pub fn ky_zero_row(&self) -> &[Complex64] {
        &self.coeffs[..self.grid.nkx()]
    }

    /// Multiply every row elementwise by an x-multiplier of length `nx/2+1`.
    pub fn scale_x(&mut self, multiplier: &[Complex64]) {
        let nkx = self.grid.nkx();
        debug_assert_eq!(multiplier.len(), nkx);
        for row in self.coeffs.chunks_mut(nkx) {
            for (c, m) in row.iter_mut().zip(multiplier) {
                *c *= m;
            }
        }
    }

    /// Multiply row `iky` by `multiplier[iky]`.
    pub fn scale_y(&mut self, multiplier: &[Complex64]) {
        let nkx = self.grid.nkx();
        debug_assert_eq!(multiplier.len(), self.grid.ny);
        for (row, m) in self.coeffs.chunks_mut(nkx).zip(multiplier) {
            for c in row.iter_mut() {
                *c *= m;
            }
        }
    }

    /// Sum of `|c|^2` over the full (two-sided) spectrum.
    pub fn full_norm_sqr(&self) -> f64 {
        let nx = self.grid.nx;
        let nkx = self.grid.nkx();
        self.coeffs
            .chunks(nkx)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let w = if i == 0 || i == nx / 2 { 1.0 } else { 2.0 };
                        w * c.norm_sqr()
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    /// Largest violation of `c(0, -ky) = conj c(0, ky)` on the self-conjugate
    /// columns (`k_x = 0` and the x-Nyquist column), plus any imaginary part
    /// on the four purely real corners.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst: f64 = 0.0;
        for col in [0, g.nx / 2] {
            for iky in 0..g.ny {
                let mirror = (g.ny - iky) % g.ny;
                let d = (self.at(col, iky) - self.at(col, mirror).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// Keep-mask over the half-complex layout; `false` exactly where
/// `|k_index| > N/3` on some axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DealiasMask {
    grid: Grid,
    keep: Vec<bool>,
}

/// Per-axis 2/3 rule over FFT-ordered bins.
pub fn axis_keep(n: usize) -> Vec<bool> {
    (0..n)
        .map(|i| 3 * signed_index(i, n).unsigned_abs() as usize <= n)
        .collect()
}

impl DealiasMask {
    pub fn new(grid: Grid) -> Self {
        let x_keep: Vec<bool> = (0..grid.nkx()).map(|i| 3 * i <= grid.nx).collect();
        let y_keep = if grid.dim() == 1 {
            vec![true]
        } else {
            axis_keep(grid.ny)
        };
        let mut keep = Vec::with_capacity(grid.spectral_len());
        for &ky in &y_keep {
            keep.extend(x_keep.iter().map(|&kx| kx && ky));
        }
        DealiasMask { grid, keep }
    }

    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn apply(&self, spectrum: &mut Spectrum) -> Result<()> {
        self.apply_raw(spectrum.coeffs_mut())
    }

    pub fn apply_raw(&self, coeffs: &mut [Complex64]) -> Result<()> {
        if coeffs.len() != self.keep.len() {
            return Err(Error::ShapeMismatch {
                expected: self.keep.len(),
                found: coeffs.len(),
            });
        }
        for (c, &k) in coeffs.iter_mut().zip(&self.keep) {
            if !k {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}
