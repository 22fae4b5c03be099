//! Periodic computational grids.
//!
//! The domain along each axis is `[-pi L, pi L)`, sampled at `N` equispaced
//! points. Wavenumbers are integers scaled by `1/L`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-period scale, giving `x in [-5 pi, 5 pi)`.
pub const DEFAULT_L: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub nx: usize,
    #[serde(default = "one")]
    pub ny: usize,
    #[serde(default = "default_l")]
    pub lx: f64,
    #[serde(default = "default_l")]
    pub ly: f64,
}

fn one() -> usize {
    1
}

fn default_l() -> f64 {
    DEFAULT_L
}

impl Grid {
    pub fn new_1d(nx: usize, lx: f64) -> Result<Self> {
        let g = Grid {
            nx,
            ny: 1,
            lx,
            ly: DEFAULT_L,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn new_2d(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        let g = Grid { nx, ny, lx, ly };
        g.validate()?;
        if ny < 2 {
            return Err(Error::InvalidGrid("a 2D grid needs ny >= 2".into()));
        }
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny)] {
            if n == 0 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} is not a positive power of two"
                )));
            }
        }
        if self.nx < 4 {
            return Err(Error::InvalidGrid(format!("nx = {} is too small", self.nx)));
        }
        for (name, l) in [("lx", self.lx), ("ly", self.ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        if self.ny == 1 {
            1
        } else {
            2
        }
    }

    /// Number of physical grid points.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of stored x-wavenumbers in the half-complex layout.
    pub fn nkx(&self) -> usize {
        self.nx / 2 + 1
    }

    /// Length of a half-complex spectrum: `ny` rows of `nx/2 + 1` entries.
    pub fn spectral_len(&self) -> usize {
        self.nkx() * self.ny
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI * self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        if self.dim() == 1 {
            1.0
        } else {
            2.0 * PI * self.ly / self.ny as f64
        }
    }

    /// Area (or length) element of the rectangle quadrature rule.
    pub fn cell(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// Minimal resolved distance `2 pi L / N` along x.
    pub fn min_resolved_distance(&self) -> f64 {
        self.dx()
    }

    pub fn x(&self) -> Vec<f64> {
        coordinates(self.nx, self.lx)
    }

    pub fn y(&self) -> Vec<f64> {
        if self.dim() == 1 {
            vec![0.0]
        } else {
            coordinates(self.ny, self.ly)
        }
    }

    /// Full x-wavenumber lattice in FFT order.
    pub fn kx_full(&self) -> Vec<f64> {
        wavenumbers(self.nx, self.lx)
    }

    /// Non-negative x-wavenumbers `j/L`, `j = 0..=nx/2`, matching the
    /// half-complex layout.
    pub fn kx(&self) -> Vec<f64> {
        (0..self.nkx()).map(|j| j as f64 / self.lx).collect()
    }

    pub fn ky(&self) -> Vec<f64> {
        if self.dim() == 1 {
            vec![0.0]
        } else {
            wavenumbers(self.ny, self.ly)
        }
    }

    pub fn max_kx(&self) -> f64 {
        self.nx as f64 / (2.0 * self.lx)
    }

    /// Sample `f(x, y)` at the grid points, row-major with x contiguous.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let xs = self.x();
        let ys = self.y();
        let mut out = Vec::with_capacity(self.len());
        for &y in &ys {
            out.extend(xs.iter().map(|&x| f(x, y)));
        }
        out
    }
}

pub fn coordinates(n: usize, l: f64) -> Vec<f64> {
    let h = 2.0 * PI * l / n as f64;
    (0..n).map(|i| -PI * l + i as f64 * h).collect()
}

/// `(1/L) * {0, 1, ..., N/2 - 1, -N/2, ..., -1}`.
pub fn wavenumbers(n: usize, l: f64) -> Vec<f64> {
    let half = (n / 2) as i64;
    (0..n as i64)
        .map(|i| {
            let j = if i < half { i } else { i - n as i64 };
            j as f64 / l
        })
        .collect()
}

/// Signed integer index of FFT bin `i` on an axis of length `n`.
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_layout() {
        let k = wavenumbers(8, 5.0);
        assert_eq!(k[0], 0.0);
        let expected = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (a, b) in k.iter().zip(expected) {
            assert_eq!(*a, b / 5.0);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Grid::new_1d(100, 5.0).is_err());
        assert!(Grid::new_2d(64, 24, 5.0, 5.0).is_err());
        assert!(Grid::new_1d(64, 0.0).is_err());
    }

    #[test]
    fn minimal_resolved_distance() {
        let g = Grid::new_1d(1 << 14, 5.0).unwrap();
        assert!((g.min_resolved_distance() - 10.0 * PI / 16384.0).abs() < 1e-18);
        assert_eq!(g.dim(), 1);
        assert_eq!(g.spectral_len(), 8193);
    }

    #[test]
    fn coordinates_cover_half_open_domain() {
        let g = Grid::new_2d(16, 8, 5.0, 2.0).unwrap();
        let x = g.x();
        assert_eq!(x[0], -5.0 * PI);
        assert!((x[15] + g.dx() - 5.0 * PI).abs() < 1e-12);
        assert_eq!(g.y().len(), 8);
        let s = g.sample(|x, y| x + 100.0 * y);
        assert_eq!(s[1], x[1] + 100.0 * g.y()[0]);
        assert_eq!(s[16], x[0] + 100.0 * g.y()[1]);
    }
}
