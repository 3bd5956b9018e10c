//! Measurements on simulated fields.

use crate::error::{Error, Result};
use crate::netspec::Dimension;

use super::Field;

/// Peak of the radially binned power spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominantWavenumber {
    pub wavenumber: f64,
    /// Width of one radial bin, `2π/L`.
    pub bin_width: f64,
    /// Peak bin power over the median bin power.
    pub confidence: f64,
}

/// Wavenumber carrying the most power in `field − mean`.
///
/// Modes are binned by `|k|` rounded to the nearest multiple of `2π/L`;
/// each bin holds the mean power of its modes.
pub fn dominant_wavenumber(field: &Field, component: usize) -> Result<DominantWavenumber> {
    let grid = field.grid()?;
    let u = &field.components[component];
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    let centered: Vec<f64> = u.iter().map(|v| v - mean).collect();
    let spec = grid.forward(&centered);
    let dk = grid.mode_spacing();
    let nbins = (grid.max_wavenumber() / dk).round() as usize + 1;
    let mut power = vec![0.0; nbins];
    let mut count = vec![0usize; nbins];
    for (i, z) in spec.iter().enumerate() {
        let b = (grid.wavenumber(i) / dk).round() as usize;
        power[b] += z.norm_sqr();
        count[b] += 1;
    }
    let mean_power: Vec<f64> = power
        .iter()
        .zip(&count)
        .map(|(p, c)| if *c > 0 { p / *c as f64 } else { 0.0 })
        .collect();
    let (best, peak) = mean_power
        .iter()
        .enumerate()
        .skip(1)
        .fold((0, 0.0), |acc, (i, p)| if *p > acc.1 { (i, *p) } else { acc });
    if peak == 0.0 {
        return Err(Error::Domain("dominant wavenumber of a constant field".into()));
    }
    let mut rest: Vec<f64> = mean_power.iter().skip(1).copied().filter(|p| *p > 0.0).collect();
    rest.sort_by(f64::total_cmp);
    let median = rest[rest.len() / 2];
    Ok(DominantWavenumber {
        wavenumber: best as f64 * dk,
        bin_width: dk,
        confidence: peak / median,
    })
}

/// Normalized autocorrelation of `field − mean` as a function of distance,
/// in steps of the grid spacing. Entry 0 is 1.
pub fn radial_autocorrelation(field: &Field, component: usize) -> Result<Vec<f64>> {
    let grid = field.grid()?;
    let u = &field.components[component];
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    let centered: Vec<f64> = u.iter().map(|v| v - mean).collect();
    let mut spec = grid.forward(&centered);
    spec.iter_mut().for_each(|z| *z = (z.norm_sqr()).into());
    let corr = grid.inverse_real(&spec);
    if corr[0] <= 0.0 {
        return Err(Error::Domain("autocorrelation of a constant field".into()));
    }
    let half = grid.nx / 2;
    let mut sum = vec![0.0; half + 1];
    let mut count = vec![0usize; half + 1];
    for (i, c) in corr.iter().enumerate() {
        let (mx, my) = grid.mode_index(i);
        let d = ((mx * mx + my * my) as f64).sqrt().round() as usize;
        if d <= half {
            sum[d] += c;
            count[d] += 1;
        }
    }
    Ok(sum
        .iter()
        .zip(&count)
        .map(|(s, c)| if *c > 0 { s / *c as f64 / corr[0] } else { f64::NAN })
        .collect())
}

/// `x` of the rightmost column of the band of columns holding a value above
/// `threshold`, scanning right from the first such column.
///
/// On a periodic box a front seeded at the left edge also spreads across
/// the wrap; only the band reached from the left is measured.
pub fn front_position(field: &Field, component: usize, threshold: f64) -> Option<f64> {
    let n = field.n;
    let u = &field.components[component];
    let rows = if field.dimension == Dimension::One { 1 } else { n };
    let active = |ix: usize| (0..rows).any(|iy| u[iy * n + ix] > threshold);
    let first = (0..n).find(|&ix| active(ix))?;
    let last = (first..n).take_while(|&ix| active(ix)).last().unwrap_or(first);
    Some(last as f64 * field.spacing)
}

/// `|û|` of one lattice mode `(m_x, m_y)`, normalized by the point count.
pub fn mode_amplitude(field: &Field, component: usize, mode: (i64, i64)) -> f64 {
    let n = field.n as i64;
    let wrap = |m: i64| m.rem_euclid(n) as usize;
    let idx = match field.dimension {
        Dimension::One => wrap(mode.0),
        Dimension::Two => wrap(mode.1) * field.n + wrap(mode.0),
    };
    let grid = field.grid().expect("field geometry is validated on construction");
    grid.forward(&field.components[component])[idx].norm() / field.len() as f64
}
