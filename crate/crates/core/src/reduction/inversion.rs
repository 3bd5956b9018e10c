//! Inverse transforms of sampled even spectra by trapezoid sums.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::eigenflow::WavenumberGrid;
use crate::error::{Error, Result};
use crate::netspec::Dimension;
use crate::symbol::{j0, ring_transform};

/// Number of radii on which the angular-quadrature route is re-evaluated.
const DUAL_ROUTE_POINTS: usize = 17;

/// Real-space kernel sampled on a uniform grid.
///
/// One-dimensional profiles cover `x = jΔx` for `j = −n/2..=n/2`; radial
/// profiles cover `r = jΔr` for `j = 0..=n/2`. In both cases the spacing
/// is `π/s_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelProfile {
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
    pub spacing: f64,
    pub radial: bool,
}

impl KernelProfile {
    /// Value at the coordinate origin.
    pub fn at_origin(&self) -> f64 {
        if self.radial {
            self.values[0]
        } else {
            self.values[self.values.len() / 2]
        }
    }

    /// Linear interpolation at distance `|x|` from the origin; zero beyond
    /// the sampled range.
    pub fn value_at(&self, x: f64) -> f64 {
        let d = x.abs();
        let origin = if self.radial { 0 } else { self.values.len() / 2 };
        let t = d / self.spacing;
        let j = t.floor() as usize;
        let last = self.values.len() - 1 - origin;
        if j >= last {
            return if j == last && t == j as f64 {
                self.values[origin + j]
            } else {
                0.0
            };
        }
        let w = t - j as f64;
        (1.0 - w) * self.values[origin + j] + w * self.values[origin + j + 1]
    }

    /// CSV with columns `x` (or `r`) and `value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.radial { "r,value\n" } else { "x,value\n" });
        for (x, v) in self.coords.iter().zip(&self.values) {
            out.push_str(&format!("{x:.17e},{v:.17e}\n"));
        }
        out
    }
}

/// Radial profile together with the cross-check between the Bessel and
/// angular-quadrature routes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialInversion {
    pub profile: KernelProfile,
    /// Largest absolute difference between the two routes on the checked
    /// radii.
    pub dual_route_max_diff: f64,
    pub checked_radii: Vec<f64>,
}

fn check_len(mu: &[f64], grid: WavenumberGrid) -> Result<()> {
    if mu.len() != grid.n {
        return Err(Error::GridMismatch(format!(
            "spectrum has {} samples but the grid has {}",
            mu.len(),
            grid.n
        )));
    }
    Ok(())
}

/// Trapezoid weights on the grid.
fn weights(grid: WavenumberGrid) -> Vec<f64> {
    let mut w: Vec<f64> = (0..grid.n)
        .map(|i| {
            if i + 1 == grid.n {
                grid.s_max - grid.point(i - 1)
            } else {
                grid.spacing()
            }
        })
        .collect();
    // Interior weights are the average of the two adjacent intervals.
    let h: Vec<f64> = (1..grid.n).map(|i| grid.point(i) - grid.point(i - 1)).collect();
    w[0] = 0.5 * h[0];
    for i in 1..grid.n - 1 {
        w[i] = 0.5 * (h[i - 1] + h[i]);
    }
    w[grid.n - 1] = 0.5 * h[grid.n - 2];
    w
}

/// Index past the last sample where `f` is non-negligible.
fn support_end(f: &[f64]) -> usize {
    let peak = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0;
    }
    f.iter().rposition(|v| v.abs() > 1e-18 * peak).map_or(0, |i| i + 1)
}

/// `K(x) = (1/π)∫₀^{s_max} μ(s) cos(sx) ds`.
pub fn invert_kernel_1d(mu: &[f64], grid: WavenumberGrid) -> Result<KernelProfile> {
    check_len(mu, grid)?;
    let dx = PI / grid.s_max;
    let half = grid.n / 2;
    let w = weights(grid);
    let end = support_end(mu);
    let terms: Vec<(f64, f64)> = (0..end).map(|i| (grid.point(i), w[i] * mu[i])).collect();
    let right: Vec<f64> = (0..=half)
        .into_par_iter()
        .map(|j| {
            let x = j as f64 * dx;
            terms.iter().map(|(s, wm)| wm * (s * x).cos()).sum::<f64>() / PI
        })
        .collect();
    let mut values = Vec::with_capacity(2 * half + 1);
    values.extend(right[1..].iter().rev());
    values.extend(&right);
    let coords = (0..=2 * half).map(|k| (k as f64 - half as f64) * dx).collect();
    Ok(KernelProfile {
        coords,
        values,
        spacing: dx,
        radial: false,
    })
}

/// `Ǩ(r) = (1/2π)∫₀^{R_max} R μ(R) J₀(rR) dR`, cross-checked against the
/// angular double integral on a subset of radii.
pub fn invert_kernel_radial(mu: &[f64], grid: WavenumberGrid) -> Result<RadialInversion> {
    check_len(mu, grid)?;
    let dr = PI / grid.s_max;
    let half = grid.n / 2;
    let w = weights(grid);
    // R·μ(R) has a kink at the origin once continued evenly, which limits
    // the trapezoid sum to second order. A Gaussian carrying μ(0) is split
    // off and transformed in closed form.
    let c = grid.s_max / 8.0;
    let base = |r: f64| mu[0] * c * c / (4.0 * PI) * (-c * c * r * r / 4.0).exp();
    let f: Vec<f64> = (0..grid.n)
        .map(|i| {
            let s = grid.point(i);
            s * (mu[i] - mu[0] * (-(s / c).powi(2)).exp())
        })
        .collect();
    let end = support_end(&f);
    let terms: Vec<(f64, f64)> = (0..end).map(|i| (grid.point(i), w[i] * f[i])).collect();

    let route = |r: f64, kernel: &dyn Fn(f64) -> f64| {
        terms.iter().map(|(s, wf)| wf * kernel(r * s)).sum::<f64>() / (2.0 * PI) + base(r)
    };
    let values: Vec<f64> = (0..=half).into_par_iter().map(|j| route(j as f64 * dr, &j0)).collect();

    // Checked radii span the inner eighth of the profile, where the kernel
    // carries its mass; ring quadrature cost grows with the radius.
    let stride = (half / 8 / (DUAL_ROUTE_POINTS - 1)).max(1);
    let mut checked: Vec<usize> = (0..DUAL_ROUTE_POINTS).map(|k| (k * stride).min(half)).collect();
    checked.dedup();
    let diffs: Vec<f64> = checked
        .par_iter()
        .map(|&j| {
            let quad = route(j as f64 * dr, &|z| ring_transform(1.0, z, Dimension::Two));
            (quad - values[j]).abs()
        })
        .collect();
    let dual_route_max_diff = diffs.iter().fold(0.0f64, |m, d| m.max(*d));

    Ok(RadialInversion {
        profile: KernelProfile {
            coords: (0..=half).map(|j| j as f64 * dr).collect(),
            values,
            spacing: dr,
            radial: true,
        },
        dual_route_max_diff,
        checked_radii: checked.iter().map(|&j| j as f64 * dr).collect(),
    })
}

/// `2∫₀^X K(x) cos(sx) dx` by trapezoid on the profile.
pub fn forward_cosine_1d(profile: &KernelProfile, s: f64) -> f64 {
    let half = profile.values.len() / 2;
    let dx = profile.spacing;
    let right = &profile.values[half..];
    let n = right.len();
    let sum: f64 = right
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let w = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
            w * v * (s * j as f64 * dx).cos()
        })
        .sum();
    2.0 * dx * sum
}

/// `2π∫₀^X r Ǩ(r) J₀(sr) dr` by trapezoid on the profile.
pub fn forward_hankel(profile: &KernelProfile, s: f64) -> f64 {
    let dr = profile.spacing;
    let n = profile.values.len();
    let sum: f64 = profile
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let r = j as f64 * dr;
            let w = if j + 1 == n { 0.5 } else { 1.0 };
            w * r * v * j0(s * r)
        })
        .sum();
    // Endpoint correction for r·Ǩ(r) continued oddly through the origin.
    2.0 * PI * (dr * sum + dr * dr / 12.0 * profile.values[0])
}
