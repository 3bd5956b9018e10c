//! Periodic grids and their discrete Fourier transforms.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::netspec::Dimension;

/// Uniform periodic grid of `nx × ny` points (`ny = 1` in 1D), stored row
/// by row with `x` fastest.
#[derive(Clone)]
pub struct PeriodicGrid {
    pub dimension: Dimension,
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    fft_x: Arc<dyn Fft<f64>>,
    ifft_x: Arc<dyn Fft<f64>>,
    fft_y: Arc<dyn Fft<f64>>,
    ifft_y: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("dimension", &self.dimension)
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("spacing", &self.spacing)
            .finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.nx == other.nx && self.spacing == other.spacing
    }
}

impl PeriodicGrid {
    pub fn new(dimension: Dimension, n: usize, spacing: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::Grid(format!("grid size must be a power of two, got {n}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Grid(format!("grid spacing must be positive, got {spacing}")));
        }
        let ny = match dimension {
            Dimension::One => 1,
            Dimension::Two => n,
        };
        let mut planner = FftPlanner::new();
        Ok(PeriodicGrid {
            dimension,
            nx: n,
            ny,
            spacing,
            fft_x: planner.plan_fft_forward(n),
            ifft_x: planner.plan_fft_inverse(n),
            fft_y: planner.plan_fft_forward(ny),
            ifft_y: planner.plan_fft_inverse(ny),
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Side length of the periodic box.
    pub fn box_length(&self) -> f64 {
        self.nx as f64 * self.spacing
    }

    /// Area element: `Δx` or `Δx²`.
    pub fn cell(&self) -> f64 {
        match self.dimension {
            Dimension::One => self.spacing,
            Dimension::Two => self.spacing * self.spacing,
        }
    }

    /// Spacing of the lattice of wavenumbers, `2π/L`.
    pub fn mode_spacing(&self) -> f64 {
        2.0 * PI / self.box_length()
    }

    /// Signed mode index along an axis of `n` points.
    fn signed(m: usize, n: usize) -> i64 {
        if m <= n / 2 {
            m as i64
        } else {
            m as i64 - n as i64
        }
    }

    /// Integer mode indices of flat index `i`.
    pub fn mode_index(&self, i: usize) -> (i64, i64) {
        (Self::signed(i % self.nx, self.nx), Self::signed(i / self.nx, self.ny))
    }

    /// `|k|` of flat index `i`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        let (mx, my) = self.mode_index(i);
        self.mode_spacing() * ((mx * mx + my * my) as f64).sqrt()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.wavenumber(i)).collect()
    }

    /// Largest `|k|` on the lattice.
    pub fn max_wavenumber(&self) -> f64 {
        let h = (self.nx / 2) as f64;
        let r = if self.dimension == Dimension::Two {
            h * 2f64.sqrt()
        } else {
            h
        };
        self.mode_spacing() * r
    }

    /// Position of flat index `i` as `(x, y)`.
    pub fn position(&self, i: usize) -> (f64, f64) {
        ((i % self.nx) as f64 * self.spacing, (i / self.nx) as f64 * self.spacing)
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.transform(&mut buf, true);
        buf
    }

    /// Inverse transform including the `1/N` factor; returns the real part.
    pub fn inverse_real(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut buf = spectrum.to_vec();
        self.transform(&mut buf, false);
        let scale = 1.0 / self.len() as f64;
        buf.iter().map(|z| z.re * scale).collect()
    }

    /// Inverse transform including the `1/N` factor.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spectrum.to_vec();
        self.transform(&mut buf, false);
        let scale = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    fn transform(&self, buf: &mut [Complex64], forward: bool) {
        let (fx, fy) = if forward {
            (&self.fft_x, &self.fft_y)
        } else {
            (&self.ifft_x, &self.ifft_y)
        };
        fx.process(buf);
        if self.ny > 1 {
            let mut t = transpose(buf, self.nx, self.ny);
            fy.process(&mut t);
            buf.copy_from_slice(&transpose(&t, self.ny, self.nx));
        }
    }

    /// `u ↦ F⁻¹(m(|k|) F u)` for a multiplier given on the lattice.
    pub fn apply_multiplier(&self, values: &[f64], multiplier: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(values);
        spec.iter_mut().zip(multiplier).for_each(|(z, m)| *z *= m);
        self.inverse_real(&spec)
    }

    /// Circular convolution `Δx^d Σ_y K(x − y) u(y)` through the FFT.
    pub fn convolve(&self, kernel: &[f64], values: &[f64]) -> Vec<f64> {
        let k = self.forward(kernel);
        let mut u = self.forward(values);
        let cell = self.cell();
        u.iter_mut().zip(&k).for_each(|(a, b)| *a *= b * cell);
        self.inverse_real(&u)
    }

    /// The same convolution by direct summation; `O(N²)`.
    pub fn convolve_direct(&self, kernel: &[f64], values: &[f64]) -> Vec<f64> {
        let cell = self.cell();
        (0..self.len())
            .map(|i| {
                let (ix, iy) = (i % self.nx, i / self.nx);
                let mut sum = 0.0;
                for (j, v) in values.iter().enumerate() {
                    let (jx, jy) = (j % self.nx, j / self.nx);
                    let dx = (ix + self.nx - jx) % self.nx;
                    let dy = (iy + self.ny - jy) % self.ny;
                    sum += kernel[dy * self.nx + dx] * v;
                }
                cell * sum
            })
            .collect()
    }

    /// Real-space samples on this grid of the kernel with transform
    /// `multiplier` on the lattice.
    pub fn kernel_samples(&self, multiplier: &[f64]) -> Vec<f64> {
        let spec: Vec<Complex64> = multiplier.iter().map(|m| Complex64::new(*m, 0.0)).collect();
        let cell = self.cell();
        self.inverse_real(&spec).iter().map(|v| v / cell).collect()
    }
}

fn transpose(buf: &[Complex64], rows_len: usize, rows: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); buf.len()];
    for r in 0..rows {
        for c in 0..rows_len {
            out[c * rows + r] = buf[r * rows_len + c];
        }
    }
    out
}
