//! Effective equations assembled from a reduced spectrum.

use crate::eigenflow::{LambdaH, WavenumberGrid};
use crate::error::{Error, Result};
use crate::netspec::Dimension;

use super::inversion::{invert_kernel_1d, invert_kernel_radial, KernelProfile};
use super::{ReducedSpectrum, ReductionMethod, SpectrumKind};

/// Saturating cutoff `χ`: 1 on `|u| ≤ u*/2`, linear down to 0 at `|u| = u*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub u_star: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec { u_star: 1.0 }
    }
}

impl CutoffSpec {
    pub fn new(u_star: f64) -> Result<Self> {
        if u_star.is_nan() || u_star <= 0.0 {
            return Err(Error::Domain(format!("u* must be positive, got {u_star}")));
        }
        Ok(CutoffSpec { u_star })
    }

    /// `χ ≡ 1`: the linear effective equation.
    pub fn disabled() -> Self {
        CutoffSpec { u_star: f64::INFINITY }
    }

    pub fn is_enabled(&self) -> bool {
        self.u_star.is_finite()
    }

    pub fn chi(&self, u: f64) -> f64 {
        let a = u.abs();
        let half = 0.5 * self.u_star;
        if a <= half {
            1.0
        } else if a >= self.u_star {
            0.0
        } else {
            (self.u_star - a) / half
        }
    }
}

/// One kernel: its spectrum on the reduction grid and its profile.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveKernel {
    pub spectrum: Vec<f64>,
    pub profile: KernelProfile,
}

impl EffectiveKernel {
    /// Transform at wavenumber `s` by linear interpolation, zero beyond
    /// `s_max`.
    pub fn transform_at(&self, grid: WavenumberGrid, s: f64) -> f64 {
        let s = s.abs();
        if s > grid.s_max {
            return 0.0;
        }
        let t = s / grid.spacing();
        let i = (t.floor() as usize).min(grid.n - 2);
        let (s0, s1) = (grid.point(i), grid.point(i + 1));
        let w = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        (1.0 - w) * self.spectrum[i] + w * self.spectrum[i + 1]
    }
}

/// The coupling of `Y` into the `X` equation.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    Identity,
    Kernel(EffectiveKernel),
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum EffectiveKernels {
    Scalar {
        k: EffectiveKernel,
    },
    Pair {
        k: EffectiveKernel,
        l: Coupling,
        m: EffectiveKernel,
        n: EffectiveKernel,
    },
}

/// `u_t = 𝓛u + χ(u)(K*u)` or the pair system, with `𝓛 = F⁻¹(λ_h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveSystem {
    pub lambda_h: LambdaH,
    pub dimension: Dimension,
    pub grid: WavenumberGrid,
    pub kernels: EffectiveKernels,
    pub cutoff: CutoffSpec,
    /// Largest disagreement between the two radial inversion routes.
    pub dual_route_max_diff: Option<f64>,
}

impl EffectiveSystem {
    /// `𝓛` written as a differential operator.
    pub fn operator_description(&self) -> String {
        match self.lambda_h.degree {
            2 => {
                let lap = if self.dimension == Dimension::One {
                    "∂ₓ²"
                } else {
                    "Δ"
                };
                format!("{:.6}·{lap}", -self.lambda_h.coefficient)
            }
            _ => "0".into(),
        }
    }

    /// Named kernels in output order; the identity coupling is omitted.
    pub fn named_kernels(&self) -> Vec<(&'static str, &EffectiveKernel)> {
        match &self.kernels {
            EffectiveKernels::Scalar { k } => vec![("K", k)],
            EffectiveKernels::Pair { k, l, m, n } => {
                let mut out = vec![("K", k)];
                if let Coupling::Kernel(l) = l {
                    out.push(("L", l));
                }
                out.push(("M", m));
                out.push(("N", n));
                out
            }
        }
    }
}

/// Inverts every curve of `spectrum` into a kernel.
pub fn build_effective_system(
    spectrum: &ReducedSpectrum,
    dimension: Dimension,
    cutoff: CutoffSpec,
) -> Result<EffectiveSystem> {
    let grid = spectrum.grid;
    let mut worst: Option<f64> = None;
    let mut kernel = |curve: &[f64]| -> Result<EffectiveKernel> {
        let profile = match dimension {
            Dimension::One => invert_kernel_1d(curve, grid)?,
            Dimension::Two => {
                let inv = invert_kernel_radial(curve, grid)?;
                worst = Some(worst.unwrap_or(0.0).max(inv.dual_route_max_diff));
                inv.profile
            }
        };
        Ok(EffectiveKernel {
            spectrum: curve.to_vec(),
            profile,
        })
    };
    let kernels = match &spectrum.kind {
        SpectrumKind::Scalar { mu } => EffectiveKernels::Scalar { k: kernel(mu)? },
        SpectrumKind::Pair(c) => {
            let l = match spectrum.method {
                ReductionMethod::WayII => Coupling::Identity,
                _ => Coupling::Kernel(kernel(&c.p)?),
            };
            EffectiveKernels::Pair {
                k: kernel(&c.nu1)?,
                l,
                m: kernel(&c.q)?,
                n: kernel(&c.nu2)?,
            }
        }
    };
    Ok(EffectiveSystem {
        lambda_h: spectrum.lambda_h,
        dimension,
        grid,
        kernels,
        cutoff,
        dual_route_max_diff: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambert::DelayParams;
    use crate::reduction::PairCurves;

    #[test]
    fn chi_examples() {
        let c = CutoffSpec::new(2.0).unwrap();
        assert_eq!(c.chi(0.0), 1.0);
        assert_eq!(c.chi(2.0), 0.0);
        assert_eq!(c.chi(1.5), 0.5);
        assert_eq!(c.chi(-1.5), 0.5);
        assert_eq!(c.chi(7.0), 0.0);
        assert_eq!(CutoffSpec::disabled().chi(1e300), 1.0);
        assert!(CutoffSpec::new(0.0).is_err());
    }

    #[test]
    fn chi_continuous_and_bounded() {
        let c = CutoffSpec::default();
        let mut prev = c.chi(-2.0);
        for i in 1..=4000 {
            let u = -2.0 + i as f64 * 1e-3;
            let v = c.chi(u);
            assert!((0.0..=1.0).contains(&v));
            assert!((v - prev).abs() <= 2e-3 + 1e-12);
            prev = v;
        }
    }

    fn scalar(mu: Vec<f64>, grid: WavenumberGrid, lh: LambdaH) -> ReducedSpectrum {
        ReducedSpectrum {
            grid,
            lambda_h: lh,
            method: ReductionMethod::ExactLambert,
            params: DelayParams::default(),
            kind: SpectrumKind::Scalar { mu },
            warnings: vec![],
        }
    }

    #[test]
    fn operator_from_lambda_h() {
        let grid = WavenumberGrid::new(10.0, 64).unwrap();
        let sys = build_effective_system(
            &scalar(vec![0.0; 64], grid, LambdaH::quadratic(-0.05)),
            Dimension::One,
            CutoffSpec::default(),
        )
        .unwrap();
        assert_eq!(sys.operator_description(), "0.050000·∂ₓ²");
        let sys = build_effective_system(
            &scalar(vec![0.0; 64], grid, LambdaH::ZERO),
            Dimension::Two,
            CutoffSpec::default(),
        )
        .unwrap();
        assert_eq!(sys.operator_description(), "0");
        assert!(sys.dual_route_max_diff.is_some());
    }

    #[test]
    fn way_two_pair_uses_identity_coupling() {
        let grid = WavenumberGrid::new(10.0, 64).unwrap();
        let curve: Vec<f64> = grid.samples().iter().map(|s| (-s * s).exp()).collect();
        let c = PairCurves {
            nu1: curve.clone(),
            nu2: curve.clone(),
            p: vec![1.0; 64],
            q: vec![0.0; 64],
            complex: vec![false; 64],
            xi_c: 0.0,
            p_c: 1.0,
            window_start: 0.0,
            window_end: 0.0,
        };
        let mut spec = scalar(vec![], grid, LambdaH::ZERO);
        spec.kind = SpectrumKind::Pair(c);
        spec.method = ReductionMethod::WayII;
        let sys = build_effective_system(&spec, Dimension::One, CutoffSpec::default()).unwrap();
        let names: Vec<&str> = sys.named_kernels().iter().map(|(n, _)| *n).collect();
        assert_eq!(names, ["K", "M", "N"]);
        spec.method = ReductionMethod::WayI;
        let sys = build_effective_system(&spec, Dimension::One, CutoffSpec::default()).unwrap();
        assert_eq!(sys.named_kernels().len(), 4);
    }

    #[test]
    fn transform_interpolation() {
        let grid = WavenumberGrid::new(10.0, 101).unwrap();
        let k = EffectiveKernel {
            spectrum: grid.samples(),
            profile: invert_kernel_1d(&vec![0.0; 101], grid).unwrap(),
        };
        assert!((k.transform_at(grid, 3.33) - 3.33).abs() < 1e-12);
        assert!((k.transform_at(grid, -3.33) - 3.33).abs() < 1e-12);
        assert_eq!(k.transform_at(grid, 10.5), 0.0);
        assert!((k.transform_at(grid, 10.0) - 10.0).abs() < 1e-12);
    }
}
