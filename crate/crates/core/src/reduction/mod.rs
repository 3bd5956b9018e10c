//! From the regularized symbol to a reduced spectrum and its real-space
//! kernels.
//!
//! A real leading spectrum reduces to one curve `μ_max(s)`. A leading pair
//! that collides into a conjugate pair reduces to the 2×2 system
//! `[[ν₁, p], [q, ν₂]]` per wavenumber.

mod effective;
mod inversion;
pub mod mollifier;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::eigenflow::{eigenvalues, sample_family, EigenBranches, LambdaH, WavenumberGrid};
use crate::error::{Error, Result};
use crate::lambert::{m_max, m_star, DelayParams};
use crate::symbol::SpectralSymbol;

pub use effective::{build_effective_system, Coupling, CutoffSpec, EffectiveKernel, EffectiveKernels, EffectiveSystem};
pub use inversion::{
    forward_cosine_1d, forward_hankel, invert_kernel_1d, invert_kernel_radial, KernelProfile, RadialInversion,
};
pub use mollifier::Mollifier;

/// Edge-to-peak ratio above which a sampled curve counts as undecayed.
pub const DECAY_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularizationVariant {
    /// Damp only the bounded part of `B_h`.
    Split,
    /// Damp all of `B_h` by `e^{−εs²}`.
    Uniform,
    /// Damp all of `B_h` by the mollifier transform.
    Mollifier,
}

impl RegularizationVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            RegularizationVariant::Split => "split",
            RegularizationVariant::Uniform => "uniform",
            RegularizationVariant::Mollifier => "mollifier",
        }
    }
}

impl FromStr for RegularizationVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split" => Ok(RegularizationVariant::Split),
            "uniform" => Ok(RegularizationVariant::Uniform),
            "mollifier" => Ok(RegularizationVariant::Mollifier),
            _ => Err(Error::Domain(format!(
                "unknown regularization `{s}` (split, uniform, mollifier)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationMode {
    pub variant: RegularizationVariant,
    pub epsilon: f64,
    pub mollifier: Option<Mollifier>,
}

impl RegularizationMode {
    pub fn new(variant: RegularizationVariant, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        let mollifier = match variant {
            RegularizationVariant::Mollifier => Some(Mollifier::matching_gaussian(epsilon)),
            _ => None,
        };
        Ok(RegularizationMode {
            variant,
            epsilon,
            mollifier,
        })
    }

    pub fn split(epsilon: f64) -> Result<Self> {
        Self::new(RegularizationVariant::Split, epsilon)
    }

    pub fn uniform(epsilon: f64) -> Result<Self> {
        Self::new(RegularizationVariant::Uniform, epsilon)
    }

    pub fn with_mollifier(epsilon: f64, mollifier: Mollifier) -> Result<Self> {
        let mut mode = Self::new(RegularizationVariant::Mollifier, epsilon)?;
        mode.mollifier = Some(mollifier);
        Ok(mode)
    }

    /// Damping factor at wavenumber `s`.
    pub fn damping(&self, s: f64) -> f64 {
        match (self.variant, self.mollifier) {
            (RegularizationVariant::Mollifier, Some(j)) => j.transform(s),
            _ => (-self.epsilon * s * s).exp(),
        }
    }
}

/// `B_ε(s)`: the symbol with `λ_h` removed and then damped.
#[derive(Debug, Clone)]
pub struct RegularizedSymbol {
    symbol: SpectralSymbol,
    lambda_h: LambdaH,
    mode: RegularizationMode,
}

/// Regularizes `symbol`. Growth classification is structural: diffusion
/// grows like `s²`, every other entry is bounded.
pub fn regularize(symbol: &SpectralSymbol, lambda_h: LambdaH, mode: RegularizationMode) -> RegularizedSymbol {
    RegularizedSymbol {
        symbol: symbol.clone(),
        lambda_h,
        mode,
    }
}

impl RegularizedSymbol {
    pub fn symbol(&self) -> &SpectralSymbol {
        &self.symbol
    }

    pub fn lambda_h(&self) -> LambdaH {
        self.lambda_h
    }

    pub fn mode(&self) -> RegularizationMode {
        self.mode
    }

    /// `B_h(s) = B(s) − λ_h(s) I`.
    pub fn shifted(&self, s: f64) -> DMatrix<f64> {
        let n = self.symbol.size();
        self.symbol.evaluate(s) - DMatrix::identity(n, n) * self.lambda_h.evaluate(s)
    }

    pub fn evaluate(&self, s: f64) -> DMatrix<f64> {
        let n = self.symbol.size();
        let damp = self.mode.damping(s);
        match self.mode.variant {
            RegularizationVariant::Split => {
                let (unbounded, bounded) = self.symbol.split(s);
                unbounded - DMatrix::identity(n, n) * self.lambda_h.evaluate(s) + bounded * damp
            }
            _ => self.shifted(s) * damp,
        }
    }

    /// Eigenvalue branches of `B_ε` on `grid`.
    pub fn branches(&self, grid: WavenumberGrid) -> Result<EigenBranches> {
        sample_family(|s| self.evaluate(s), grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionMethod {
    ExactLambert,
    WayI,
    WayII,
}

impl ReductionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ReductionMethod::ExactLambert => "exact",
            ReductionMethod::WayI => "way1",
            ReductionMethod::WayII => "way2",
        }
    }
}

impl fmt::Display for ReductionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReductionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ReductionMethod::ExactLambert),
            "way1" => Ok(ReductionMethod::WayI),
            "way2" => Ok(ReductionMethod::WayII),
            _ => Err(Error::Domain(format!("unknown method `{s}` (exact, way1, way2)"))),
        }
    }
}

/// Curves of the reduced pair system, sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCurves {
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Whether the leading pair is complex at each sample.
    pub complex: Vec<bool>,
    pub xi_c: f64,
    /// `p` at the collision point itself.
    pub p_c: f64,
    pub window_start: f64,
    pub window_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumKind {
    Scalar { mu: Vec<f64> },
    Pair(PairCurves),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSpectrum {
    pub grid: WavenumberGrid,
    pub lambda_h: LambdaH,
    pub method: ReductionMethod,
    pub params: DelayParams,
    pub kind: SpectrumKind,
    /// Non-fatal diagnostics, such as undecayed curves.
    pub warnings: Vec<String>,
}

impl ReducedSpectrum {
    /// Named curves in output order.
    pub fn curves(&self) -> Vec<(&'static str, &[f64])> {
        match &self.kind {
            SpectrumKind::Scalar { mu } => vec![("mu_max", mu.as_slice())],
            SpectrumKind::Pair(c) => vec![
                ("nu1", c.nu1.as_slice()),
                ("p", c.p.as_slice()),
                ("q", c.q.as_slice()),
                ("nu2", c.nu2.as_slice()),
            ],
        }
    }

    /// Growth rate of the reduced linear equation at grid point `i`,
    /// including `λ_h`.
    pub fn growth_rate(&self, i: usize) -> f64 {
        let lh = self.lambda_h.evaluate(self.grid.point(i));
        match &self.kind {
            SpectrumKind::Scalar { mu } => lh + mu[i],
            SpectrumKind::Pair(c) => {
                let (t, d) = (c.nu1[i] + c.nu2[i], c.nu1[i] * c.nu2[i] - c.p[i] * c.q[i]);
                let disc = t * t / 4.0 - d;
                lh + t / 2.0 + disc.max(0.0).sqrt()
            }
        }
    }

    /// Curves subject to the edge decay check. The pair coupling `p` tends
    /// to a constant rather than to zero and is left out.
    fn decaying_curves(&self) -> Vec<(&'static str, &[f64])> {
        self.curves().into_iter().filter(|(name, _)| *name != "p").collect()
    }

    /// Whether every decaying curve passes the edge decay check.
    pub fn is_decayed(&self) -> bool {
        self.decaying_curves()
            .iter()
            .all(|(_, c)| decay_ratio(c) < DECAY_THRESHOLD)
    }

    /// CSV with columns `s` and one per curve, after a `#` line carrying
    /// the method, `λ_h` and delay parameters.
    pub fn to_csv(&self) -> String {
        let curves = self.curves();
        let mut out = format!(
            "# method={} lambda_h_degree={} lambda_h={:e} delta={:e} epsilon={:e}\n",
            self.method, self.lambda_h.degree, self.lambda_h.coefficient, self.params.delta, self.params.epsilon
        );
        out.push('s');
        for (name, _) in &curves {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..self.grid.n {
            out.push_str(&format!("{:.17e}", self.grid.point(i)));
            for (_, c) in &curves {
                out.push_str(&format!(",{:.17e}", c[i]));
            }
            out.push('\n');
        }
        out
    }

    /// Reads the output of [`ReducedSpectrum::to_csv`].
    ///
    /// The pair's collision data is not stored; the window is recovered
    /// from the samples where `q ≠ 0`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Format(format!("spectrum CSV: {m}"));
        let mut lines = text.lines();
        let meta = lines
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .ok_or_else(|| bad("missing `#` header".into()))?;
        let field = |key: &str| -> Result<&str> {
            meta.split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| bad(format!("missing `{key}`")))
        };
        let num = |key: &str| -> Result<f64> { field(key)?.parse().map_err(|_| bad(format!("bad `{key}`"))) };
        let method: ReductionMethod = field("method")?.parse()?;
        let lambda_h = match field("lambda_h_degree")? {
            "0" => LambdaH::ZERO,
            "2" => LambdaH::quadratic(num("lambda_h")?),
            d => return Err(bad(format!("unsupported lambda_h degree {d}"))),
        };
        let params = DelayParams::new(num("delta")?, num("epsilon")?)?;

        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| bad("missing column header".into()))?
            .split(',')
            .collect();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
        for (row, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let vals: Vec<&str> = line.split(',').collect();
            if vals.len() != header.len() {
                return Err(bad(format!(
                    "row {} has {} fields, expected {}",
                    row + 1,
                    vals.len(),
                    header.len()
                )));
            }
            for (c, v) in cols.iter_mut().zip(vals) {
                c.push(
                    v.trim()
                        .parse()
                        .map_err(|_| bad(format!("row {}: `{v}` is not a number", row + 1)))?,
                );
            }
        }
        let s = &cols[0];
        if s.len() < 2 || s[0] != 0.0 {
            return Err(bad("the s column must start at 0 with at least two samples".into()));
        }
        let grid = WavenumberGrid::new(s[s.len() - 1], s.len())?;
        if s.iter()
            .enumerate()
            .any(|(i, v)| (v - grid.point(i)).abs() > 1e-9 * grid.s_max)
        {
            return Err(bad("the s column is not uniformly spaced".into()));
        }
        let col = |name: &str| -> Result<Vec<f64>> {
            header
                .iter()
                .position(|h| h.trim() == name)
                .map(|i| cols[i].clone())
                .ok_or_else(|| bad(format!("missing column `{name}`")))
        };
        let kind = if header.len() == 2 {
            SpectrumKind::Scalar { mu: col("mu_max")? }
        } else {
            let q = col("q")?;
            let complex: Vec<bool> = q.iter().map(|v| *v != 0.0).collect();
            let first = complex.iter().position(|c| *c);
            let last = complex.iter().rposition(|c| *c);
            let (window_start, window_end) = match (first, last) {
                (Some(a), Some(b)) => (grid.point(a), grid.point(b)),
                _ => (0.0, 0.0),
            };
            let p = col("p")?;
            SpectrumKind::Pair(PairCurves {
                nu1: col("nu1")?,
                nu2: col("nu2")?,
                p_c: p[last.unwrap_or(0)],
                p,
                q,
                complex,
                xi_c: window_end,
                window_start,
                window_end,
            })
        };
        let mut spectrum = ReducedSpectrum {
            grid,
            lambda_h,
            method,
            params,
            kind,
            warnings: Vec::new(),
        };
        spectrum.warnings = decay_warnings(&spectrum.decaying_curves());
        Ok(spectrum)
    }
}

/// `|f(s_max)| / max|f|`, zero for an identically zero curve.
pub fn decay_ratio(curve: &[f64]) -> f64 {
    let peak = curve.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match curve.last() {
        Some(v) if peak > 0.0 => v.abs() / peak,
        _ => 0.0,
    }
}

fn decay_warnings(curves: &[(&str, &[f64])]) -> Vec<String> {
    curves
        .iter()
        .filter_map(|(name, c)| {
            let r = decay_ratio(c);
            (r >= DECAY_THRESHOLD).then(|| {
                format!("{name} has not decayed at s_max: edge/peak = {r:.3e} (threshold {DECAY_THRESHOLD:.0e})")
            })
        })
        .collect()
}

fn check_finite(name: &str, grid: WavenumberGrid, curve: &[f64]) -> Result<()> {
    match curve.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::Domain(format!("{name} is not finite at s = {}", grid.point(i)))),
        None => Ok(()),
    }
}

/// Scalar reduction `μ_max(s)` for a regularized symbol whose eigenvalues
/// stay real (exact and way I) or for any symbol (way II).
pub fn reduce_real(
    reg: &RegularizedSymbol,
    grid: WavenumberGrid,
    params: DelayParams,
    method: ReductionMethod,
) -> Result<ReducedSpectrum> {
    let branches = reg.branches(grid)?;
    if method != ReductionMethod::WayII {
        if let Some(i) = (0..grid.n).find(|&i| branches.at(i).iter().any(|z| z.im != 0.0)) {
            return Err(Error::ComplexBranches { s: grid.point(i) });
        }
    }
    let delta = params.delta;
    let mu: Vec<f64> = (0..grid.n)
        .map(|i| {
            let vals = branches.at(i);
            let map = |z: f64| match method {
                ReductionMethod::ExactLambert => m_max(z, delta),
                ReductionMethod::WayI => m_star(z, delta),
                ReductionMethod::WayII => z,
            };
            vals.iter().map(|z| map(z.re)).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    check_finite("mu_max", grid, &mu)?;
    let warnings = decay_warnings(&[("mu_max", &mu)]);
    Ok(ReducedSpectrum {
        grid,
        lambda_h: reg.lambda_h(),
        method,
        params,
        kind: SpectrumKind::Scalar { mu },
        warnings,
    })
}

/// Pair reduction for a leading pair that collides into a conjugate pair.
pub fn reduce_complex(
    reg: &RegularizedSymbol,
    grid: WavenumberGrid,
    params: DelayParams,
    method: ReductionMethod,
) -> Result<ReducedSpectrum> {
    if method == ReductionMethod::ExactLambert {
        return Err(Error::Unsupported(
            "the exact Lambert reduction is only available for real branches; use way1 or way2".into(),
        ));
    }
    let branches = reg.branches(grid)?;
    let Some(col) = branches.collision.clone() else {
        return Err(Error::Unsupported(
            "the leading pair never becomes complex; use the scalar reduction".into(),
        ));
    };
    let delta = params.delta;
    let n = grid.n;
    let (mut nu1, mut nu2, mut p, mut q) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let v = branches.sorted_at(i);
        if col.complex[i] {
            let (a, b) = (col.a[i], col.b[i]);
            match method {
                ReductionMethod::WayII => {
                    nu1[i] = a;
                    nu2[i] = a;
                    p[i] = 1.0;
                    q[i] = -b * b;
                }
                _ => {
                    let g = (delta * a).exp();
                    let (sn, cs) = (delta * b).sin_cos();
                    let a_star = g * (a * cs - b * sn);
                    let b_star = g * (b * cs + a * sn);
                    nu1[i] = a_star;
                    nu2[i] = a_star;
                    p[i] = g * (cs + a * delta * sinc(delta * b));
                    q[i] = -b_star * b;
                }
            }
        } else {
            let (z1, z2) = (v[0].re, v[1].re);
            match method {
                ReductionMethod::WayII => {
                    nu1[i] = z1;
                    nu2[i] = z2;
                    p[i] = 1.0;
                }
                _ => {
                    nu1[i] = m_star(z1, delta);
                    nu2[i] = m_star(z2, delta);
                    p[i] = star_divided_difference(z1, z2, delta);
                }
            }
        }
    }
    let p_c = match method {
        ReductionMethod::WayII => 1.0,
        _ => {
            let a_c = pair_mean_at(reg, col.xi_c)?;
            star_slope(a_c, delta)
        }
    };
    for (name, c) in [("nu1", &nu1), ("p", &p), ("q", &q), ("nu2", &nu2)] {
        check_finite(name, grid, c)?;
    }
    let warnings = decay_warnings(&[("nu1", &nu1), ("q", &q), ("nu2", &nu2)]);
    Ok(ReducedSpectrum {
        grid,
        lambda_h: reg.lambda_h(),
        method,
        params,
        kind: SpectrumKind::Pair(PairCurves {
            nu1,
            nu2,
            p,
            q,
            complex: col.complex,
            xi_c: col.xi_c,
            p_c,
            window_start: col.window_start,
            window_end: col.window_end,
        }),
        warnings,
    })
}

/// Pair reduction when the leading pair of the regularized symbol collides,
/// scalar reduction otherwise. The exact method is always scalar.
pub fn reduce(
    reg: &RegularizedSymbol,
    grid: WavenumberGrid,
    params: DelayParams,
    method: ReductionMethod,
) -> Result<ReducedSpectrum> {
    if method == ReductionMethod::ExactLambert {
        return reduce_real(reg, grid, params, method);
    }
    match reduce_complex(reg, grid, params, method) {
        Err(Error::Unsupported(msg)) if msg.contains("never becomes complex") => reduce_real(reg, grid, params, method),
        other => other,
    }
}

/// Derivative of `ζ e^{δζ}`.
pub fn star_slope(zeta: f64, delta: f64) -> f64 {
    (delta * zeta).exp() * (1.0 + delta * zeta)
}

/// `(M*(z₂) − M*(z₁)) / (z₂ − z₁)`, with the derivative at the midpoint
/// for nearly equal arguments.
fn star_divided_difference(z1: f64, z2: f64, delta: f64) -> f64 {
    let scale = z1.abs().max(z2.abs()).max(1.0);
    if (z2 - z1).abs() <= 1e-7 * scale {
        star_slope(0.5 * (z1 + z2), delta)
    } else {
        (m_star(z2, delta) - m_star(z1, delta)) / (z2 - z1)
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Mean real part of the two leading eigenvalues of `B_ε(s)`.
fn pair_mean_at(reg: &RegularizedSymbol, s: f64) -> Result<f64> {
    let mut vals = eigenvalues(&reg.evaluate(s)).ok_or(Error::EigenFailure { s })?;
    vals.sort_by(|a, b| b.re.total_cmp(&a.re));
    Ok(0.5 * (vals[0].re + vals[1].re))
}
