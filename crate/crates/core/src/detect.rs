//! Recovery of a kernel transform from two snapshots of a scalar field.
//!
//! For `u_t = K*u` every Fourier mode evolves as `e^{tK̂}`, so
//! `K̂ = (û(t+δ)/û(t) − 1)/δ + O(δ)`. Modes whose amplitude at `t` is below
//! a floor are masked rather than regularized.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::simulate::{Field, PeriodicGrid};

/// Default floor on `|û_before|`, relative to its largest mode.
pub const DEFAULT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// `|k|` of every lattice mode, in the field's storage order.
    pub wavenumbers: Vec<f64>,
    /// Real part of the recovered transform; `None` on masked modes.
    pub spectrum: Vec<Option<f64>>,
    /// Real-space kernel on the field grid, from the unmasked modes.
    pub kernel: Vec<f64>,
    pub delta: f64,
    /// Largest `|Im K̂|` over the unmasked modes, relative to the largest
    /// `|Re K̂|`.
    pub imaginary_residue: f64,
    pub floor: f64,
    grid: PeriodicGrid,
}

impl DetectionResult {
    pub fn masked_count(&self) -> usize {
        self.spectrum.iter().filter(|v| v.is_none()).count()
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Unmasked modes averaged in radial bins of width `2π/L`, as
    /// `(|k|, K̂, count)`.
    pub fn radial_bins(&self) -> Vec<(f64, f64, usize)> {
        let dk = self.grid.mode_spacing();
        let nb = (self.grid.max_wavenumber() / dk).round() as usize + 1;
        let mut sum = vec![0.0; nb];
        let mut count = vec![0usize; nb];
        for (k, v) in self.wavenumbers.iter().zip(&self.spectrum) {
            if let Some(v) = v {
                let b = (k / dk).round() as usize;
                sum[b] += v;
                count[b] += 1;
            }
        }
        (0..nb)
            .filter(|&b| count[b] > 0)
            .map(|b| (b as f64 * dk, sum[b] / count[b] as f64, count[b]))
            .collect()
    }

    /// CSV with columns `k, spectrum, count`.
    pub fn spectrum_csv(&self) -> String {
        let mut out = String::from("k,spectrum,count\n");
        for (k, v, c) in self.radial_bins() {
            out.push_str(&format!("{k:.17e},{v:.17e},{c}\n"));
        }
        out
    }

    pub fn mask_report(&self) -> String {
        format!(
            "modes: {}\nmasked: {}\nfloor: {:e}\ndelta: {:e}\nimaginary_residue: {:e}\n",
            self.spectrum.len(),
            self.masked_count(),
            self.floor,
            self.delta,
            self.imaginary_residue
        )
    }
}

/// Detects the kernel from the first component of two snapshots `delta`
/// apart, with the default floor.
pub fn detect_kernel(before: &Field, after: &Field, delta: f64) -> Result<DetectionResult> {
    detect_kernel_with_floor(before, after, delta, DEFAULT_FLOOR)
}

pub fn detect_kernel_with_floor(before: &Field, after: &Field, delta: f64, floor: f64) -> Result<DetectionResult> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    if !before.same_geometry(after) || before.components.is_empty() || after.components.is_empty() {
        return Err(Error::GridMismatch("snapshots must share one grid".into()));
    }
    let grid = before.grid()?;
    let b = grid.forward(&before.components[0]);
    let a = grid.forward(&after.components[0]);
    let peak = b.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let threshold = floor * peak;
    let mut spectrum = Vec::with_capacity(b.len());
    let mut full = vec![Complex64::new(0.0, 0.0); b.len()];
    let (mut re_max, mut im_max) = (0.0f64, 0.0f64);
    for i in 0..b.len() {
        if peak > 0.0 && b[i].norm() > threshold {
            let k = (a[i] / b[i] - 1.0) / delta;
            re_max = re_max.max(k.re.abs());
            im_max = im_max.max(k.im.abs());
            spectrum.push(Some(k.re));
            full[i] = Complex64::new(k.re, 0.0);
        } else {
            spectrum.push(None);
        }
    }
    if spectrum.iter().all(Option::is_none) {
        return Err(Error::AllMasked);
    }
    let cell = grid.cell();
    let kernel = grid.inverse_real(&full).iter().map(|v| v / cell).collect();
    Ok(DetectionResult {
        wavenumbers: grid.wavenumbers(),
        spectrum,
        kernel,
        delta,
        imaginary_residue: if re_max > 0.0 { im_max / re_max } else { im_max },
        floor,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netspec::Dimension;
    use crate::simulate::{initial_field, Initial};

    fn evolve(field: &Field, khat: impl Fn(f64) -> f64, delta: f64) -> Field {
        let grid = field.grid().unwrap();
        let m: Vec<f64> = grid.wavenumbers().iter().map(|k| (delta * khat(*k)).exp()).collect();
        let mut out = field.clone();
        out.components[0] = grid.apply_multiplier(&field.components[0], &m);
        out
    }

    #[test]
    fn unchanged_field_gives_zero() {
        let f = initial_field(Dimension::One, 64, 0.2, 1, &Initial::Noise { amplitude: 1.0 }, 1).unwrap();
        let d = detect_kernel(&f, &f, 0.37).unwrap();
        assert!(d.spectrum.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn single_mode_growth() {
        let g = PeriodicGrid::new(Dimension::One, 64, 0.2).unwrap();
        let xi = 4.0 * g.mode_spacing();
        let before = Field::from_fn(Dimension::One, 64, 0.2, |x, _| (xi * x).cos()).unwrap();
        let after = before.scaled(1.3);
        let d = detect_kernel(&before, &after, 0.01).unwrap();
        assert_eq!(d.masked_count(), 62);
        for (k, v) in d.wavenumbers.iter().zip(&d.spectrum) {
            if let Some(v) = v {
                assert!((k - xi).abs() < 1e-12);
                assert!((v - 30.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_field_is_all_masked() {
        let f = Field::zeros(Dimension::Two, 8, 0.5, 1).unwrap();
        assert!(matches!(detect_kernel(&f, &f, 0.1), Err(Error::AllMasked)));
    }

    #[test]
    fn synthetic_gaussian_recovered() {
        let f = initial_field(Dimension::Two, 64, 0.5, 1, &Initial::Noise { amplitude: 1.0 }, 2).unwrap();
        let khat = |k: f64| 2.0 * (-k * k).exp() - 0.5;
        let delta = 1e-3;
        let d = detect_kernel(&f, &evolve(&f, khat, delta), delta).unwrap();
        let (mut e, mut n) = (0.0, 0.0);
        for (k, v) in d.wavenumbers.iter().zip(&d.spectrum) {
            if let Some(v) = v {
                e += (v - khat(*k)).powi(2);
                n += khat(*k).powi(2);
            }
        }
        assert!((e / n).sqrt() < 0.01);
        assert!(d.imaginary_residue < 1e-6);
    }

    #[test]
    fn gauge_invariance_is_exact() {
        let f = initial_field(Dimension::One, 128, 0.2, 1, &Initial::Noise { amplitude: 1.0 }, 3).unwrap();
        let g = evolve(&f, |k| -k * k, 0.01);
        let a = detect_kernel(&f, &g, 0.01).unwrap();
        let b = detect_kernel(&f.scaled(8.0), &g.scaled(8.0), 0.01).unwrap();
        assert_eq!(a.spectrum, b.spectrum);
    }

    #[test]
    fn rejects_bad_input() {
        let f = Field::zeros(Dimension::One, 64, 0.2, 1).unwrap();
        let g = Field::zeros(Dimension::One, 32, 0.2, 1).unwrap();
        assert!(detect_kernel(&f, &g, 0.1).is_err());
        assert!(detect_kernel(&f, &f, 0.0).is_err());
    }
}
