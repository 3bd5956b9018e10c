//! Fourier symbol `B(s)` of a network: transport on the diagonal plus the
//! interaction matrix with ring couplings replaced by their transforms.

mod bessel;

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::netspec::{validate, Dimension, InteractionRange, NetworkSpec, SampledTransform, TransportTerm};

pub use bessel::j0;

/// Transform of one transport term at wavenumber `s`.
pub fn fourier_transport(term: &TransportTerm, s: f64, _dimension: Dimension) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("wavenumber must be finite, got {s}")));
    }
    Ok(match term {
        TransportTerm::None => 0.0,
        TransportTerm::Diffusion(d) => -d * s * s,
        TransportTerm::CustomKernel(t) => t.evaluate(s),
    })
}

/// Mass-one ring transform: `cos(sl)` in 1D, `J₀(ls)` in 2D.
///
/// The 2D value comes from the angular integral
/// `(2/π)∫₀^{π/2} cos(ls sinθ) dθ`, evaluated by trapezoid sums that double
/// from 128 intervals until two successive sums differ by less than `1e-12`.
pub fn ring_transform(l: f64, s: f64, dimension: Dimension) -> f64 {
    match dimension {
        Dimension::One => (s * l).cos(),
        Dimension::Two => ring_quadrature(l * s),
    }
}

fn ring_quadrature(z: f64) -> f64 {
    let f = |theta: f64| (z * theta.sin()).cos();
    let mut n = 128usize;
    let mut h = FRAC_PI_2 / n as f64;
    let mut inner: f64 = (1..n).map(|i| f(i as f64 * h)).sum();
    let ends = 0.5 * (f(0.0) + f(FRAC_PI_2));
    let mut prev = h * (ends + inner);
    loop {
        let mids: f64 = (0..n).map(|i| f((i as f64 + 0.5) * h)).sum();
        inner += mids;
        n *= 2;
        h *= 0.5;
        let cur = h * (ends + inner);
        if (cur - prev).abs() < 1e-12 || n >= 1 << 22 {
            return cur * 2.0 / PI;
        }
        prev = cur;
    }
}

#[derive(Debug, Clone)]
struct RingEntry {
    row: usize,
    col: usize,
    /// Gain times ring mass, so the entry is `weight · ring_transform`.
    weight: f64,
    l: f64,
}

/// `B(s)` for one network in one dimension.
#[derive(Debug, Clone)]
pub struct SpectralSymbol {
    spec: NetworkSpec,
    dimension: Dimension,
    diffusivity: Vec<f64>,
    custom: Vec<Option<SampledTransform>>,
    local: DMatrix<f64>,
    rings: Vec<RingEntry>,
}

/// Builds the symbol of `spec` in `dimension`.
pub fn assemble_symbol(spec: &NetworkSpec, dimension: Dimension) -> Result<SpectralSymbol> {
    let report = validate(spec);
    if !report.is_ok() {
        return Err(Error::InvalidSpec(report));
    }
    let n = spec.len();
    let mut local = DMatrix::zeros(n, n);
    let mut rings = Vec::new();
    for e in &spec.interactions {
        let row = spec.index_of(&e.target).expect("validated");
        let col = spec.index_of(&e.source).expect("validated");
        match e.range {
            InteractionRange::Local => local[(row, col)] += e.gain,
            InteractionRange::Ring(l) => rings.push(RingEntry {
                row,
                col,
                weight: e.gain * spec.ring_normalization.mass(l, dimension),
                l,
            }),
        }
    }
    Ok(SpectralSymbol {
        spec: spec.clone(),
        dimension,
        diffusivity: spec.components.iter().map(|c| c.transport.diffusivity()).collect(),
        custom: spec
            .components
            .iter()
            .map(|c| match &c.transport {
                TransportTerm::CustomKernel(t) => Some(t.clone()),
                _ => None,
            })
            .collect(),
        local,
        rings,
    })
}

impl SpectralSymbol {
    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn size(&self) -> usize {
        self.local.nrows()
    }

    /// `B(s)`; even in `s`.
    pub fn evaluate(&self, s: f64) -> DMatrix<f64> {
        let (unbounded, bounded) = self.split(s);
        unbounded + bounded
    }

    /// Splits `B(s)` into the part that grows with `s` (diffusion, `−d s²`
    /// on the diagonal) and the part that stays bounded (local couplings,
    /// ring transforms, sampled transport kernels).
    pub fn split(&self, s: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let s = s.abs();
        let n = self.size();
        let unbounded = DMatrix::from_fn(n, n, |i, j| if i == j { -self.diffusivity[i] * s * s } else { 0.0 });
        let mut bounded = self.local.clone();
        for (i, t) in self.custom.iter().enumerate() {
            if let Some(t) = t {
                bounded[(i, i)] += t.evaluate(s);
            }
        }
        let mut cache: Vec<(f64, f64)> = Vec::new();
        for r in &self.rings {
            let p = match cache.iter().find(|(l, _)| *l == r.l) {
                Some(&(_, p)) => p,
                None => {
                    let p = ring_transform(r.l, s, self.dimension);
                    cache.push((r.l, p));
                    p
                }
            };
            bounded[(r.row, r.col)] += r.weight * p;
        }
        (unbounded, bounded)
    }

    pub fn diffusivities(&self) -> &[f64] {
        &self.diffusivity
    }

    /// Largest diffusivity; scales the unbounded part.
    pub fn max_diffusivity(&self) -> f64 {
        self.diffusivity.iter().fold(0.0, |m, d| m.max(*d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netspec::{builtin_preset, Component, RingNormalization};
    use proptest::prelude::*;

    #[test]
    fn transport_examples() {
        let d = |x| TransportTerm::Diffusion(x);
        assert_eq!(fourier_transport(&d(0.05), 2.0, Dimension::One).unwrap(), -0.2);
        assert_eq!(
            fourier_transport(&TransportTerm::None, 7.0, Dimension::Two).unwrap(),
            0.0
        );
        assert_eq!(fourier_transport(&d(3.0), 1.0, Dimension::One).unwrap(), -3.0);
        assert!(fourier_transport(&d(3.0), f64::NAN, Dimension::One).is_err());
    }

    #[test]
    fn ring_examples() {
        assert_eq!(ring_transform(3.0, 0.0, Dimension::One), 1.0);
        assert!((ring_transform(3.0, PI / 3.0, Dimension::One) + 1.0).abs() < 1e-15);
        assert!(ring_transform(1.0, 2.404_825_557_695_773, Dimension::Two).abs() < 1e-12);
        assert!((ring_transform(5.0, 0.0, Dimension::Two) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ring_quadrature_matches_series() {
        let mut worst = 0.0f64;
        for i in 0..=1000 {
            let r = 50.0 * i as f64 / 1000.0;
            worst = worst.max((ring_transform(1.0, r, Dimension::Two) - j0(r)).abs());
        }
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn activator_inhibitor_entries() {
        let sym = assemble_symbol(&builtin_preset("activator_inhibitor").unwrap(), Dimension::One).unwrap();
        assert_eq!(
            sym.evaluate(0.0),
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 4.0, -3.0])
        );
        let b = sym.evaluate(2.0);
        let want = DMatrix::from_row_slice(2, 2, &[1.0 - 0.2, -1.0, 4.0, -3.0 - 12.0]);
        assert!((b - want).abs().max() < 1e-14);
    }

    #[test]
    fn pigment_entry_at_half_period() {
        let mut spec = builtin_preset("pigment").unwrap();
        let (d, k1, k5, l) = (0.02, 0.055 * 0.016, 0.02, 3.0);
        let s = PI / l;
        // Unit-weight rings: the 1D ring carries weight 2.
        let sym = assemble_symbol(&spec, Dimension::One).unwrap();
        let want = -d * s * s + 2.0 * k1 - k5;
        assert!((sym.evaluate(s)[(0, 0)] - want).abs() < 1e-15);
        spec.ring_normalization = RingNormalization::UnitMass;
        let sym = assemble_symbol(&spec, Dimension::One).unwrap();
        let want = -d * s * s + k1 - k5;
        assert!((sym.evaluate(s)[(0, 0)] - want).abs() < 1e-15);
    }

    #[test]
    fn origin_equals_interaction_matrix() {
        for name in crate::netspec::PRESET_NAMES {
            let spec = builtin_preset(name).unwrap();
            for dim in [Dimension::One, Dimension::Two] {
                let sym = assemble_symbol(&spec, dim).unwrap();
                let diff = (sym.evaluate(0.0) - spec.interaction_matrix(dim)).abs().max();
                assert!(diff < 1e-12, "{name} {dim}: {diff}");
            }
        }
    }

    #[test]
    fn invalid_spec_rejected() {
        let mut spec = builtin_preset("activator_inhibitor").unwrap();
        spec.components[0].transport = TransportTerm::Diffusion(-1.0);
        assert!(matches!(
            assemble_symbol(&spec, Dimension::One),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn custom_kernel_on_diagonal() {
        let mut spec = builtin_preset("activator_inhibitor").unwrap();
        spec.components.push(Component {
            name: "w".into(),
            transport: TransportTerm::CustomKernel(SampledTransform {
                wavenumbers: vec![0.0, 1.0, 2.0],
                values: vec![0.0, -1.0, -3.0],
            }),
        });
        let sym = assemble_symbol(&spec, Dimension::One).unwrap();
        assert_eq!(sym.evaluate(1.5)[(2, 2)], -2.0);
        assert_eq!(sym.split(1.5).0[(2, 2)], 0.0);
    }

    proptest! {
        #[test]
        fn even_in_s(s in 0.0..40.0f64, which in 0usize..7) {
            let spec = builtin_preset(crate::netspec::PRESET_NAMES[which]).unwrap();
            for dim in [Dimension::One, Dimension::Two] {
                let sym = assemble_symbol(&spec, dim).unwrap();
                prop_assert_eq!(sym.evaluate(s), sym.evaluate(-s));
            }
        }

        #[test]
        fn pure_diffusion_same_in_1d_and_2d(s in 0.0..40.0f64) {
            for name in ["activator_inhibitor", "three_node"] {
                let spec = builtin_preset(name).unwrap();
                let one = assemble_symbol(&spec, Dimension::One).unwrap().evaluate(s);
                let two = assemble_symbol(&spec, Dimension::Two).unwrap().evaluate(s);
                prop_assert_eq!(one, two);
            }
        }
    }
}
