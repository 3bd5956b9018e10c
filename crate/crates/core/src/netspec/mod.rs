//! Network specifications: the components of a linear reaction–diffusion
//! network, how each one moves in space, and the signed couplings between
//! them.
//!
//! A [`NetworkSpec`] is the input of every downstream stage. It is usually
//! read from the TOML-based config format ([`parse_network`]) or taken from
//! one of the built-in presets ([`builtin_preset`]).

mod config;
mod presets;

use std::fmt;

use nalgebra::DMatrix;

pub use config::{parse_network, to_config_string};
pub use presets::{builtin_preset, PRESET_NAMES};

/// Spatial dimension of the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    One,
    Two,
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
        }
    }

    pub fn from_usize(d: usize) -> Option<Self> {
        match d {
            1 => Some(Dimension::One),
            2 => Some(Dimension::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}D", self.as_usize())
    }
}

/// Fourier transform of a nonlocal dispersal kernel, sampled on increasing
/// wavenumbers. Evaluation interpolates linearly in `|s|` and holds the last
/// value beyond the sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTransform {
    pub wavenumbers: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledTransform {
    pub fn evaluate(&self, s: f64) -> f64 {
        let s = s.abs();
        let ws = &self.wavenumbers;
        let vs = &self.values;
        // Negative sample positions are mirrors; evaluation uses the s >= 0 half.
        let start = ws.partition_point(|&w| w < 0.0);
        let (ws, vs) = (&ws[start..], &vs[start..]);
        if ws.is_empty() {
            // Only negative samples: use the mirrored set.
            return self.evaluate_mirrored(s);
        }
        interpolate(ws, vs, s)
    }

    fn evaluate_mirrored(&self, s: f64) -> f64 {
        let ws: Vec<f64> = self.wavenumbers.iter().rev().map(|w| -w).collect();
        let vs: Vec<f64> = self.values.iter().rev().copied().collect();
        interpolate(&ws, &vs, s)
    }
}

fn interpolate(ws: &[f64], vs: &[f64], s: f64) -> f64 {
    if s <= ws[0] {
        return vs[0];
    }
    let last = ws.len() - 1;
    if s >= ws[last] {
        return vs[last];
    }
    let i = ws.partition_point(|&w| w <= s) - 1;
    let t = (s - ws[i]) / (ws[i + 1] - ws[i]);
    vs[i] + t * (vs[i + 1] - vs[i])
}

/// How a component moves in space.
#[derive(Debug, Clone, PartialEq)]
pub enum TransportTerm {
    None,
    /// Local diffusion with coefficient `d` (length²/time).
    Diffusion(f64),
    /// Nonlocal dispersal given directly by its Fourier transform.
    CustomKernel(SampledTransform),
}

impl TransportTerm {
    /// Diffusivity for `Diffusion`, zero otherwise.
    pub fn diffusivity(&self) -> f64 {
        match self {
            TransportTerm::Diffusion(d) => *d,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub name: String,
    pub transport: TransportTerm,
}

/// Spatial reach of an interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InteractionRange {
    Local,
    /// Coupling to cells at a fixed distance `l`.
    Ring(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionEntry {
    pub source: String,
    pub target: String,
    /// Positive for activation, negative for inhibition (1/time).
    pub gain: f64,
    pub range: InteractionRange,
}

/// Total weight carried by a ring kernel.
///
/// `UnitMass` normalizes the ring measure to mass one, so its transform is
/// `cos(sl)` in 1D and `J0(lR)` in 2D. `UnitWeight` puts weight one on each
/// of the two points in 1D and unit line density on the circle in 2D, which
/// multiplies those transforms by 2 and by `2πl` respectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RingNormalization {
    #[default]
    UnitMass,
    UnitWeight,
}

impl RingNormalization {
    /// Total mass of the ring kernel at distance `l`.
    pub fn mass(self, l: f64, dimension: Dimension) -> f64 {
        match (self, dimension) {
            (RingNormalization::UnitMass, _) => 1.0,
            (RingNormalization::UnitWeight, Dimension::One) => 2.0,
            (RingNormalization::UnitWeight, Dimension::Two) => 2.0 * std::f64::consts::PI * l,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RingNormalization::UnitMass => "unit_mass",
            RingNormalization::UnitWeight => "unit_weight",
        }
    }
}

/// A linear reaction–diffusion network with optional long-range couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub components: Vec<Component>,
    pub interactions: Vec<InteractionEntry>,
    pub dimension: Dimension,
    pub ring_normalization: RingNormalization,
    pub notes: String,
}

impl NetworkSpec {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    /// Diagonal diffusion matrix `D`.
    pub fn diffusion_matrix(&self) -> DMatrix<f64> {
        let d: Vec<f64> = self.components.iter().map(|c| c.transport.diffusivity()).collect();
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d))
    }

    /// Interaction matrix with every ring coupling at full strength, i.e. the
    /// local network seen by spatially uniform states (rings scaled by their
    /// mass in `dimension`).
    pub fn interaction_matrix(&self, dimension: Dimension) -> DMatrix<f64> {
        let n = self.len();
        let mut a = DMatrix::zeros(n, n);
        for e in &self.interactions {
            let (Some(i), Some(j)) = (self.index_of(&e.target), self.index_of(&e.source)) else {
                continue;
            };
            let weight = match e.range {
                InteractionRange::Local => 1.0,
                InteractionRange::Ring(l) => self.ring_normalization.mass(l, dimension),
            };
            a[(i, j)] += e.gain * weight;
        }
        a
    }
}

/// Outcome of [`validate`]. Empty `errors` means the spec is usable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub errors: Vec<(String, String)>,
    pub warnings: Vec<(String, String)>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (loc, msg) in &self.errors {
            writeln!(f, "  error at {loc}: {msg}")?;
        }
        for (loc, msg) in &self.warnings {
            writeln!(f, "  warning at {loc}: {msg}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of `spec`. Never fails; problems are
/// reported as data.
pub fn validate(spec: &NetworkSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut err = |loc: String, msg: String| report.errors.push((loc, msg));

    if spec.components.is_empty() {
        err("components".into(), "network declares no components".into());
    }
    for (i, c) in spec.components.iter().enumerate() {
        let loc = format!("component.{}", c.name);
        if c.name.is_empty() {
            err(format!("components[{i}]"), "empty component name".into());
        }
        if spec.components[..i].iter().any(|o| o.name == c.name) {
            err(loc.clone(), format!("duplicate component name \"{}\"", c.name));
        }
        match &c.transport {
            TransportTerm::None => {}
            TransportTerm::Diffusion(d) => {
                if !d.is_finite() {
                    err(loc.clone(), "non-finite diffusivity".into());
                } else if *d < 0.0 {
                    err(loc.clone(), "negative diffusivity".into());
                }
            }
            TransportTerm::CustomKernel(t) => {
                for (m, e) in check_custom_kernel(t) {
                    err(format!("{loc}.transport.{m}"), e);
                }
            }
        }
    }
    for (k, e) in spec.interactions.iter().enumerate() {
        let loc = format!("interaction[{k}]");
        for name in [&e.source, &e.target] {
            if !spec.components.iter().any(|c| &c.name == name) {
                err(loc.clone(), format!("unknown component \"{name}\""));
            }
        }
        if !e.gain.is_finite() {
            err(loc.clone(), "non-finite gain".into());
        }
        if let InteractionRange::Ring(l) = e.range {
            if l <= 0.0 || !l.is_finite() {
                err(loc.clone(), "nonpositive ring distance".into());
            }
        }
    }

    for (k, e) in spec.interactions.iter().enumerate() {
        if e.gain == 0.0 {
            report
                .warnings
                .push((format!("interaction[{k}]"), "zero gain has no effect".into()));
        }
    }
    report
}

fn check_custom_kernel(t: &SampledTransform) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    if t.wavenumbers.len() != t.values.len() {
        out.push(("s", "sample count differs from value count".into()));
        return out;
    }
    if t.wavenumbers.len() < 2 {
        out.push(("s", "at least two samples are required".into()));
        return out;
    }
    if t.wavenumbers.iter().chain(&t.values).any(|v| !v.is_finite()) {
        out.push(("value", "custom kernel samples must be finite".into()));
        return out;
    }
    if t.wavenumbers.windows(2).any(|w| w[1] <= w[0]) {
        out.push(("s", "sample wavenumbers must be strictly increasing".into()));
        return out;
    }
    // Samples on both sides of zero must mirror each other.
    let scale = t.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for (&w, &v) in t.wavenumbers.iter().zip(&t.values) {
        if w < 0.0 && -w <= *t.wavenumbers.last().unwrap() {
            let other = t.evaluate(-w);
            if (other - v).abs() > 1e-9 * scale {
                out.push((
                    "value",
                    format!("transform is not even: value at {w} differs from value at {}", -w),
                ));
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_component() -> NetworkSpec {
        builtin_preset("activator_inhibitor").unwrap()
    }

    #[test]
    fn activator_inhibitor_preset_is_valid() {
        let report = validate(&two_component());
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn negative_diffusivity_is_one_error() {
        let mut spec = two_component();
        spec.components[0].transport = TransportTerm::Diffusion(-1.0);
        let report = validate(&spec);
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].1.contains("negative diffusivity"));
    }

    #[test]
    fn zero_ring_distance_is_one_error() {
        let mut spec = two_component();
        spec.interactions[0].range = InteractionRange::Ring(0.0);
        let report = validate(&spec);
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].1.contains("nonpositive ring distance"));
    }

    #[test]
    fn duplicate_and_unknown_names() {
        let mut spec = two_component();
        spec.components.push(spec.components[0].clone());
        spec.interactions[1].source = "w".into();
        let report = validate(&spec);
        assert_eq!(report.errors.len(), 2, "{report}");
        assert!(report.errors.iter().any(|(_, m)| m.contains("duplicate")));
        assert!(report.errors.iter().any(|(_, m)| m.contains("\"w\"")));
    }

    #[test]
    fn uneven_custom_kernel_rejected() {
        let mut spec = two_component();
        spec.components[0].transport = TransportTerm::CustomKernel(SampledTransform {
            wavenumbers: vec![-1.0, 0.0, 1.0],
            values: vec![0.5, 0.0, -0.5],
        });
        let report = validate(&spec);
        assert_eq!(report.errors.len(), 1, "{report}");
        assert!(report.errors[0].1.contains("not even"));
    }

    #[test]
    fn sampled_transform_interpolates_in_abs_s() {
        let t = SampledTransform {
            wavenumbers: vec![0.0, 1.0, 2.0],
            values: vec![0.0, -1.0, -4.0],
        };
        assert_eq!(t.evaluate(0.5), -0.5);
        assert_eq!(t.evaluate(-1.5), -2.5);
        assert_eq!(t.evaluate(10.0), -4.0);
    }

    #[test]
    fn ring_masses() {
        let l = 3.0;
        assert_eq!(RingNormalization::UnitMass.mass(l, Dimension::Two), 1.0);
        assert_eq!(RingNormalization::UnitWeight.mass(l, Dimension::One), 2.0);
        assert!((RingNormalization::UnitWeight.mass(l, Dimension::Two) - 6.0 * std::f64::consts::PI).abs() < 1e-15);
    }
}
