//! Time integration on periodic grids: the effective scalar and pair
//! equations, and the original linear network as an exact oracle.
//!
//! Kernels enter through their transforms. A kernel with spectrum `K̂(s)`
//! acts on a periodic field as the multiplier `K̂(|k|)` on the lattice of
//! wavenumbers, which is the convolution with its periodized profile.

mod analysis;
mod periodic;

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::netspec::{Dimension, NetworkSpec};
use crate::reduction::{Coupling, CutoffSpec, EffectiveKernel, EffectiveKernels, EffectiveSystem};
use crate::symbol::assemble_symbol;

pub use analysis::{dominant_wavenumber, front_position, mode_amplitude, radial_autocorrelation, DominantWavenumber};
pub use periodic::PeriodicGrid;

/// Box-to-kernel size ratio below which a run reports a warning.
pub const MIN_BOX_RATIO: f64 = 8.0;

/// One or more scalar fields on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub dimension: Dimension,
    /// Points per side.
    pub n: usize,
    pub spacing: f64,
    pub components: Vec<Vec<f64>>,
    pub time: f64,
}

impl Field {
    pub fn zeros(dimension: Dimension, n: usize, spacing: f64, count: usize) -> Result<Self> {
        PeriodicGrid::new(dimension, n, spacing)?;
        let len = match dimension {
            Dimension::One => n,
            Dimension::Two => n * n,
        };
        Ok(Field {
            dimension,
            n,
            spacing,
            components: vec![vec![0.0; len]; count],
            time: 0.0,
        })
    }

    pub fn from_fn(dimension: Dimension, n: usize, spacing: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut field = Field::zeros(dimension, n, spacing, 1)?;
        for (i, v) in field.components[0].iter_mut().enumerate() {
            *v = f((i % n) as f64 * spacing, (i / n) as f64 * spacing);
        }
        Ok(field)
    }

    pub fn grid(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.dimension, self.n, self.spacing)
    }

    /// Number of points per component.
    pub fn len(&self) -> usize {
        self.components.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        match self.dimension {
            Dimension::One => vec![self.n],
            Dimension::Two => vec![self.n, self.n],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_geometry(&self, other: &Field) -> bool {
        self.dimension == other.dimension && self.n == other.n && self.spacing == other.spacing
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: f64) -> Field {
        let mut out = self.clone();
        out.components.iter_mut().flatten().for_each(|v| *v *= factor);
        out
    }

    fn check(&self, dimension: Dimension, count: usize) -> Result<()> {
        if self.dimension != dimension {
            return Err(Error::GridMismatch(format!(
                "field is {} but the system is {}",
                self.dimension, dimension
            )));
        }
        if self.components.len() != count {
            return Err(Error::GridMismatch(format!(
                "expected {count} component(s), field has {}",
                self.components.len()
            )));
        }
        let want = self.n.pow(if dimension == Dimension::One { 1 } else { 2 });
        if self.components.iter().any(|c| c.len() != want) {
            return Err(Error::GridMismatch("component length does not match the grid".into()));
        }
        if self.components.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("initial field has non-finite values".into()));
        }
        Ok(())
    }
}

/// Part of the domain, in physical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// Points with `x < width`.
    LeftEdge {
        width: f64,
    },
    Disk {
        center: (f64, f64),
        radius: f64,
    },
}

impl Region {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Region::LeftEdge { width } => x < width,
            Region::Disk { center, radius } => (x - center.0).powi(2) + (y - center.1).powi(2) <= radius * radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    /// Independent uniform values in `[−amplitude, amplitude]`.
    Noise {
        amplitude: f64,
    },
    /// Zero except for `value` on `region`.
    Seeded {
        region: Region,
        value: f64,
    },
    Given(Field),
}

/// Resets `region` to zero before step `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ablation {
    pub step: usize,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub dt: f64,
    pub steps: usize,
    /// Snapshot cadence in steps; the initial and final states are always kept.
    pub record_every: usize,
    pub seed: u64,
    pub irreversible: bool,
    pub initial: Initial,
    pub ablation: Option<Ablation>,
    /// Reaction terms smaller than this in magnitude are set to zero.
    pub flush: f64,
}

impl SimParams {
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        Ok(SimParams {
            dt,
            steps,
            record_every: steps.max(1),
            seed: 0,
            irreversible: false,
            initial: Initial::Noise { amplitude: 0.01 },
            ablation: None,
            flush: 0.0,
        })
    }
}

/// Builds the initial field described by `initial`.
pub fn initial_field(
    dimension: Dimension,
    n: usize,
    spacing: f64,
    count: usize,
    initial: &Initial,
    seed: u64,
) -> Result<Field> {
    let mut field = Field::zeros(dimension, n, spacing, count)?;
    match initial {
        Initial::Noise { amplitude } => {
            let a = amplitude.abs();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for v in field.components.iter_mut().flatten() {
                *v = if a > 0.0 { rng.random_range(-a..=a) } else { 0.0 };
            }
        }
        Initial::Seeded { region, value } => {
            for c in field.components.iter_mut() {
                for (i, v) in c.iter_mut().enumerate() {
                    if region.contains((i % n) as f64 * spacing, (i / n) as f64 * spacing) {
                        *v = *value;
                    }
                }
            }
        }
        Initial::Given(f) => {
            if !f.same_geometry(&field) || f.components.len() != count {
                return Err(Error::GridMismatch(
                    "given initial field does not match the run grid".into(),
                ));
            }
            field = f.clone();
            field.time = 0.0;
        }
    }
    Ok(field)
}

fn ablate(field: &mut Field, region: Region) {
    let n = field.n;
    let h = field.spacing;
    for c in field.components.iter_mut() {
        for (i, v) in c.iter_mut().enumerate() {
            if region.contains((i % n) as f64 * h, (i / n) as f64 * h) {
                *v = 0.0;
            }
        }
    }
}

/// Recorded snapshots of a run and its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Field>,
    /// Largest stable explicit step, when the run used one.
    pub stability_bound: Option<f64>,
    /// `‖K‖₁` of the periodized kernels (largest row sum for pairs).
    pub kernel_l1: Option<f64>,
    /// Largest `|u|` seen during the run.
    pub max_abs: f64,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn last(&self) -> &Field {
        self.snapshots
            .last()
            .expect("a trajectory holds at least the initial state")
    }
}

fn lattice_multiplier(grid: &PeriodicGrid, system: &EffectiveSystem, kernel: &EffectiveKernel) -> Vec<f64> {
    grid.wavenumbers()
        .iter()
        .map(|k| kernel.transform_at(system.grid, *k))
        .collect()
}

fn l1_norm(grid: &PeriodicGrid, multiplier: &[f64]) -> f64 {
    grid.kernel_samples(multiplier).iter().map(|v| v.abs()).sum::<f64>() * grid.cell()
}

/// Size of the region where `|K|` exceeds `1e−3` of its peak.
fn decay_length(kernel: &EffectiveKernel) -> f64 {
    let p = &kernel.profile;
    let peak = p.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    p.coords
        .iter()
        .zip(&p.values)
        .filter(|(_, v)| v.abs() >= 1e-3 * peak)
        .fold(0.0f64, |m, (x, _)| m.max(x.abs()))
}

fn box_warning(grid: &PeriodicGrid, kernels: &[&EffectiveKernel]) -> Option<String> {
    let len = kernels.iter().map(|k| decay_length(k)).fold(0.0, f64::max);
    (grid.box_length() < MIN_BOX_RATIO * len).then(|| {
        format!(
            "box length {:.3} is less than {MIN_BOX_RATIO}× the kernel decay length {len:.3}",
            grid.box_length()
        )
    })
}

struct Recorder {
    every: usize,
    snapshots: Vec<Field>,
    max_abs: f64,
}

impl Recorder {
    fn new(first: &Field, every: usize) -> Self {
        Recorder {
            every: every.max(1),
            snapshots: vec![first.clone()],
            max_abs: first.max_abs(),
        }
    }

    fn observe(&mut self, step: usize, total: usize, field: &Field) -> Result<()> {
        let m = field.max_abs();
        if !m.is_finite() {
            return Err(Error::Unstable { step, max_abs: m });
        }
        self.max_abs = self.max_abs.max(m);
        if step.is_multiple_of(self.every) || step == total {
            self.snapshots.push(field.clone());
        }
        Ok(())
    }
}

fn check_cutoff(cutoff: &CutoffSpec, step: usize, field: &Field) -> Result<()> {
    let m = field.max_abs();
    if cutoff.is_enabled() && m > 10.0 * cutoff.u_star {
        return Err(Error::Unstable { step, max_abs: m });
    }
    Ok(())
}

fn flush(values: &mut [f64], threshold: f64) {
    if threshold > 0.0 {
        values.iter_mut().filter(|v| v.abs() < threshold).for_each(|v| *v = 0.0);
    }
}

/// Largest explicit step accepted for `system` on `grid`:
/// `0.5/(‖K‖₁ + |λ_h(k_max)|)`, with the largest row sum of kernel norms for
/// pairs.
pub fn stability_bound(system: &EffectiveSystem, grid: &PeriodicGrid) -> f64 {
    let norm = |k: &EffectiveKernel| l1_norm(grid, &lattice_multiplier(grid, system, k));
    let k_l1 = match &system.kernels {
        EffectiveKernels::Scalar { k } => norm(k),
        EffectiveKernels::Pair { k, l, m, n } => {
            let l_norm = match l {
                Coupling::Identity => 1.0,
                Coupling::Kernel(l) => norm(l),
            };
            (norm(k) + l_norm).max(norm(m) + norm(n))
        }
    };
    0.5 / (k_l1 + system.lambda_h.evaluate(grid.max_wavenumber()).abs())
}

/// Integrates `u_t = 𝓛u + χ(u)(K*u)`, or `u_t = 𝓛u + χ(u)max{K*u, 0}` in
/// irreversible mode.
///
/// The nonlinear equation is stepped by explicit Euler with
/// `dt ≤ 0.5/(‖K‖₁ + |λ_h(k_max)|)`. Without cutoff and irreversibility the
/// equation is linear and every mode is advanced exactly by
/// `exp(dt(λ_h + K̂))`.
pub fn simulate_scalar(system: &EffectiveSystem, field0: &Field, params: &SimParams) -> Result<Trajectory> {
    let EffectiveKernels::Scalar { k } = &system.kernels else {
        return Err(Error::Unsupported(
            "simulate_scalar needs a scalar effective system".into(),
        ));
    };
    field0.check(system.dimension, 1)?;
    let grid = field0.grid()?;
    let khat = lattice_multiplier(&grid, system, k);
    let lh: Vec<f64> = grid
        .wavenumbers()
        .iter()
        .map(|s| system.lambda_h.evaluate(*s))
        .collect();
    let k_l1 = l1_norm(&grid, &khat);
    let mut warnings: Vec<String> = box_warning(&grid, &[k]).into_iter().collect();
    let cutoff = system.cutoff;
    let linear = !cutoff.is_enabled() && !params.irreversible;

    let mut field = field0.clone();
    let mut rec = Recorder::new(&field, params.record_every);
    let dt = params.dt;

    if linear {
        let factor: Vec<f64> = khat.iter().zip(&lh).map(|(a, b)| (dt * (a + b)).exp()).collect();
        for step in 1..=params.steps {
            apply_ablation(params, step, &mut field);
            field.components[0] = grid.apply_multiplier(&field.components[0], &factor);
            field.time += dt;
            rec.observe(step, params.steps, &field)?;
        }
        return Ok(Trajectory {
            snapshots: rec.snapshots,
            stability_bound: None,
            kernel_l1: Some(k_l1),
            max_abs: rec.max_abs,
            warnings,
        });
    }

    let bound = stability_bound(system, &grid);
    if dt > bound {
        return Err(Error::TimeStep { dt, bound });
    }
    let has_operator = system.lambda_h.degree != 0;
    // Without 𝓛, χ vanishing on |u| ≥ u* caps the overshoot at the fixed
    // point of M ↦ u* + dt‖K‖₁M.
    let cap = cutoff.u_star / (1.0 - dt * k_l1) * (1.0 + 1e-12);
    let initial_max = field.max_abs();

    for step in 1..=params.steps {
        apply_ablation(params, step, &mut field);
        let u = &field.components[0];
        let spec = grid.forward(u);
        let mut conv_spec = spec.clone();
        conv_spec.iter_mut().zip(&khat).for_each(|(z, m)| *z *= m);
        let mut conv = grid.inverse_real(&conv_spec);
        flush(&mut conv, params.flush);
        let lap = if has_operator {
            let mut l = spec;
            l.iter_mut().zip(&lh).for_each(|(z, m)| *z *= m);
            Some(grid.inverse_real(&l))
        } else {
            None
        };
        let next: Vec<f64> = (0..u.len())
            .map(|i| {
                let r = if params.irreversible { conv[i].max(0.0) } else { conv[i] };
                let mut du = cutoff.chi(u[i]) * r;
                if let Some(l) = &lap {
                    du += l[i];
                }
                u[i] + dt * du
            })
            .collect();
        field.components[0] = next;
        field.time += dt;
        check_cutoff(&cutoff, step, &field)?;
        if cutoff.is_enabled() && !has_operator {
            let m = field.max_abs();
            if m > cap.max(initial_max) {
                return Err(Error::Unstable { step, max_abs: m });
            }
        }
        rec.observe(step, params.steps, &field)?;
    }
    if params.flush > 0.0 {
        warnings.push(format!(
            "reaction terms below {:.1e} were flushed to zero",
            params.flush
        ));
    }
    Ok(Trajectory {
        snapshots: rec.snapshots,
        stability_bound: Some(bound),
        kernel_l1: Some(k_l1),
        max_abs: rec.max_abs,
        warnings,
    })
}

fn apply_ablation(params: &SimParams, step: usize, field: &mut Field) {
    if let Some(a) = params.ablation {
        if a.step == step {
            ablate(field, a.region);
        }
    }
}

/// Integrates the pair system
///
/// ```text
/// X_t = 𝓛X + χ(X)(K*X + L*Y)
/// Y_t = 𝓛Y + χ(Y)(M*X + N*Y)
/// ```
///
/// where `L` may be the identity. In irreversible mode the `X` reaction is
/// replaced by `max{K*X + L*Y, 0}`. Snapshots carry `X` and `Y` as two
/// components.
pub fn simulate_pair(system: &EffectiveSystem, x0: &Field, y0: &Field, params: &SimParams) -> Result<Trajectory> {
    let EffectiveKernels::Pair { k, l, m, n } = &system.kernels else {
        return Err(Error::Unsupported("simulate_pair needs a pair effective system".into()));
    };
    x0.check(system.dimension, 1)?;
    y0.check(system.dimension, 1)?;
    if !x0.same_geometry(y0) {
        return Err(Error::GridMismatch("X and Y fields differ in geometry".into()));
    }
    let grid = x0.grid()?;
    let kk = lattice_multiplier(&grid, system, k);
    let ll = match l {
        Coupling::Identity => vec![1.0; grid.len()],
        Coupling::Kernel(l) => lattice_multiplier(&grid, system, l),
    };
    let mm = lattice_multiplier(&grid, system, m);
    let nn = lattice_multiplier(&grid, system, n);
    let lh: Vec<f64> = grid
        .wavenumbers()
        .iter()
        .map(|s| system.lambda_h.evaluate(*s))
        .collect();
    let l_norm = match l {
        Coupling::Identity => 1.0,
        Coupling::Kernel(_) => l1_norm(&grid, &ll),
    };
    let row_x = l1_norm(&grid, &kk) + l_norm;
    let row_y = l1_norm(&grid, &mm) + l1_norm(&grid, &nn);
    let norm = row_x.max(row_y);
    let mut kernels = vec![k, m, n];
    if let Coupling::Kernel(l) = l {
        kernels.push(l);
    }
    let warnings: Vec<String> = box_warning(&grid, &kernels).into_iter().collect();
    let cutoff = system.cutoff;
    let dt = params.dt;

    let mut field = x0.clone();
    field.components.push(y0.components[0].clone());
    let mut rec = Recorder::new(&field, params.record_every);

    if !cutoff.is_enabled() && !params.irreversible {
        let mut cache: HashMap<i64, DMatrix<f64>> = HashMap::new();
        let props: Vec<DMatrix<f64>> = (0..grid.len())
            .map(|i| {
                let (mx, my) = grid.mode_index(i);
                cache
                    .entry(mx * mx + my * my)
                    .or_insert_with(|| {
                        let a = DMatrix::from_row_slice(2, 2, &[kk[i] + lh[i], ll[i], mm[i], nn[i] + lh[i]]);
                        expm(&(a * dt))
                    })
                    .clone()
            })
            .collect();
        for step in 1..=params.steps {
            apply_ablation(params, step, &mut field);
            step_exact(&grid, &props, &mut field);
            field.time += dt;
            rec.observe(step, params.steps, &field)?;
        }
        return Ok(Trajectory {
            snapshots: rec.snapshots,
            stability_bound: None,
            kernel_l1: Some(norm),
            max_abs: rec.max_abs,
            warnings,
        });
    }

    let bound = stability_bound(system, &grid);
    if dt > bound {
        return Err(Error::TimeStep { dt, bound });
    }
    let has_operator = system.lambda_h.degree != 0;
    for step in 1..=params.steps {
        apply_ablation(params, step, &mut field);
        let xs = grid.forward(&field.components[0]);
        let ys = grid.forward(&field.components[1]);
        let combine = |a: &[f64], b: &[f64]| -> Vec<f64> {
            let spec: Vec<Complex64> = (0..grid.len()).map(|i| xs[i] * a[i] + ys[i] * b[i]).collect();
            grid.inverse_real(&spec)
        };
        let mut rx = combine(&kk, &ll);
        let mut ry = combine(&mm, &nn);
        flush(&mut rx, params.flush);
        flush(&mut ry, params.flush);
        let (lx, ly) = if has_operator {
            let zero = vec![0.0; grid.len()];
            (combine(&lh, &zero), combine(&zero, &lh))
        } else {
            (vec![0.0; grid.len()], vec![0.0; grid.len()])
        };
        let (x, y) = (&field.components[0], &field.components[1]);
        let nx: Vec<f64> = (0..grid.len())
            .map(|i| {
                let r = if params.irreversible { rx[i].max(0.0) } else { rx[i] };
                x[i] + dt * (lx[i] + cutoff.chi(x[i]) * r)
            })
            .collect();
        let ny: Vec<f64> = (0..grid.len())
            .map(|i| y[i] + dt * (ly[i] + cutoff.chi(y[i]) * ry[i]))
            .collect();
        field.components = vec![nx, ny];
        field.time += dt;
        check_cutoff(&cutoff, step, &field)?;
        rec.observe(step, params.steps, &field)?;
    }
    Ok(Trajectory {
        snapshots: rec.snapshots,
        stability_bound: Some(bound),
        kernel_l1: Some(norm),
        max_abs: rec.max_abs,
        warnings,
    })
}

/// Advances every Fourier mode by its propagator matrix.
fn step_exact(grid: &PeriodicGrid, props: &[DMatrix<f64>], field: &mut Field) {
    let specs: Vec<Vec<Complex64>> = field.components.iter().map(|c| grid.forward(c)).collect();
    let nc = specs.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; nc];
    for (i, p) in props.iter().enumerate() {
        for r in 0..nc {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..nc {
                acc += specs[c][i] * p[(r, c)];
            }
            out[r][i] = acc;
        }
    }
    field.components = out.iter().map(|s| grid.inverse_real(s)).collect();
}

/// Advances the linear network `U_t = DΔU + AU` (with ring couplings)
/// exactly in time: each mode is multiplied by `exp(dt·B(|k|))`.
pub fn simulate_full_network(spec: &NetworkSpec, u0: &Field, params: &SimParams) -> Result<Trajectory> {
    let symbol = assemble_symbol(spec, u0.dimension)?;
    u0.check(u0.dimension, spec.len())?;
    let grid = u0.grid()?;
    let mut cache: HashMap<i64, DMatrix<f64>> = HashMap::new();
    let props: Vec<DMatrix<f64>> = (0..grid.len())
        .map(|i| {
            let (mx, my) = grid.mode_index(i);
            cache
                .entry(mx * mx + my * my)
                .or_insert_with(|| expm(&(symbol.evaluate(grid.wavenumber(i)) * params.dt)))
                .clone()
        })
        .collect();
    let mut field = u0.clone();
    let mut rec = Recorder::new(&field, params.record_every);
    for step in 1..=params.steps {
        apply_ablation(params, step, &mut field);
        step_exact(&grid, &props, &mut field);
        field.time += params.dt;
        rec.observe(step, params.steps, &field)?;
    }
    Ok(Trajectory {
        snapshots: rec.snapshots,
        stability_bound: None,
        kernel_l1: None,
        max_abs: rec.max_abs,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenflow::{LambdaH, WavenumberGrid};
    use crate::lambert::DelayParams;
    use crate::netspec::{builtin_preset, parse_network};
    use crate::reduction::{build_effective_system, PairCurves, ReducedSpectrum, ReductionMethod, SpectrumKind};

    fn gaussian_system(dim: Dimension, amp: f64, width: f64, cutoff: CutoffSpec, lh: LambdaH) -> EffectiveSystem {
        let grid = WavenumberGrid::new(40.0, 1024).unwrap();
        // Difference of Gaussians: positive core, negative surround.
        let mu: Vec<f64> = grid
            .samples()
            .iter()
            .map(|s| amp * ((-width * s * s).exp() - 0.6 * (-4.0 * width * s * s).exp()))
            .collect();
        let spec = ReducedSpectrum {
            grid,
            lambda_h: lh,
            method: ReductionMethod::WayII,
            params: DelayParams::default(),
            kind: SpectrumKind::Scalar { mu },
            warnings: vec![],
        };
        build_effective_system(&spec, dim, cutoff).unwrap()
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let sys = gaussian_system(
            Dimension::One,
            1.0,
            1.0,
            CutoffSpec::default(),
            LambdaH::quadratic(-0.05),
        );
        let f = Field::zeros(Dimension::One, 128, 0.2, 1).unwrap();
        let p = SimParams::new(0.02, 50).unwrap();
        let t = simulate_scalar(&sys, &f, &p).unwrap();
        assert!(t.last().components[0].iter().all(|v| *v == 0.0));
        let spec = builtin_preset("activator_inhibitor").unwrap();
        let f2 = Field::zeros(Dimension::One, 128, 0.2, 2).unwrap();
        let t = simulate_full_network(&spec, &f2, &p).unwrap();
        assert!(t.last().components.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn time_step_bound_enforced() {
        let sys = gaussian_system(Dimension::One, 5.0, 1.0, CutoffSpec::default(), LambdaH::ZERO);
        let f = Field::zeros(Dimension::One, 128, 0.2, 1).unwrap();
        let err = simulate_scalar(&sys, &f, &SimParams::new(10.0, 1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::TimeStep { .. }));
    }

    #[test]
    fn heat_equation_mode_decay() {
        let spec = parse_network("[component.u]\ntransport = { diffusion = 0.3 }\n").unwrap();
        let g = PeriodicGrid::new(Dimension::One, 64, 0.25).unwrap();
        let xi = 3.0 * g.mode_spacing();
        let f = Field::from_fn(Dimension::One, 64, 0.25, |x, _| (xi * x).cos()).unwrap();
        let p = SimParams::new(0.1, 20).unwrap();
        let t = simulate_full_network(&spec, &f, &p).unwrap();
        let want = (-0.3 * xi * xi * 2.0).exp();
        let got = mode_amplitude(t.last(), 0, (3, 0)) / mode_amplitude(&f, 0, (3, 0));
        assert!((got / want - 1.0).abs() < 1e-10, "{got} {want}");
    }

    #[test]
    fn oracle_is_linear() {
        let spec = builtin_preset("activator_inhibitor").unwrap();
        let f = initial_field(Dimension::One, 128, 0.2, 2, &Initial::Noise { amplitude: 0.1 }, 5).unwrap();
        let p = SimParams::new(0.1, 30).unwrap();
        let a = simulate_full_network(&spec, &f, &p).unwrap();
        let b = simulate_full_network(&spec, &f.scaled(3.5), &p).unwrap();
        let scale = a.last().max_abs();
        for (x, y) in a
            .last()
            .components
            .iter()
            .flatten()
            .zip(b.last().components.iter().flatten())
        {
            assert!((3.5 * x - y).abs() <= 1e-10 * 3.5 * scale);
        }
    }

    #[test]
    fn irreversible_is_monotone_and_bounded() {
        let sys = gaussian_system(Dimension::Two, 2.0, 0.5, CutoffSpec::default(), LambdaH::ZERO);
        let f = initial_field(
            Dimension::Two,
            32,
            0.5,
            1,
            &Initial::Seeded {
                region: Region::LeftEdge { width: 2.0 },
                value: 0.5,
            },
            0,
        )
        .unwrap();
        let mut p = SimParams::new(0.05, 200).unwrap();
        p.irreversible = true;
        p.record_every = 1;
        let t = simulate_scalar(&sys, &f, &p).unwrap();
        for w in t.snapshots.windows(2) {
            for (a, b) in w[0].components[0].iter().zip(&w[1].components[0]) {
                assert!(b >= a);
            }
        }
        let k = t.kernel_l1.unwrap();
        assert!(t.max_abs <= 1.0 / (1.0 - 0.05 * k) + 1e-12);
    }

    #[test]
    fn linear_run_matches_dispersion() {
        let sys = gaussian_system(
            Dimension::One,
            1.0,
            1.0,
            CutoffSpec::disabled(),
            LambdaH::quadratic(-0.05),
        );
        let g = PeriodicGrid::new(Dimension::One, 128, 0.2).unwrap();
        let m = 5;
        let xi = m as f64 * g.mode_spacing();
        let f = Field::from_fn(Dimension::One, 128, 0.2, |x, _| 1e-3 * (xi * x).cos()).unwrap();
        let p = SimParams::new(0.1, 10).unwrap();
        let t = simulate_scalar(&sys, &f, &p).unwrap();
        let EffectiveKernels::Scalar { k } = &sys.kernels else {
            unreachable!()
        };
        let rate = k.transform_at(sys.grid, xi) - 0.05 * xi * xi;
        let got = (mode_amplitude(t.last(), 0, (m as i64, 0)) / mode_amplitude(&f, 0, (m as i64, 0))).ln() / 1.0;
        assert!((got - rate).abs() < 1e-10 * rate.abs().max(1.0));
    }

    #[test]
    fn pair_decouples_to_scalar() {
        let scalar = gaussian_system(Dimension::One, 1.0, 1.0, CutoffSpec::default(), LambdaH::ZERO);
        let EffectiveKernels::Scalar { k } = &scalar.kernels else {
            unreachable!()
        };
        let n = k.spectrum.len();
        let c = PairCurves {
            nu1: k.spectrum.clone(),
            nu2: k.spectrum.clone(),
            p: vec![0.0; n],
            q: vec![0.0; n],
            complex: vec![false; n],
            xi_c: 0.0,
            p_c: 0.0,
            window_start: 0.0,
            window_end: 0.0,
        };
        let spec = ReducedSpectrum {
            grid: scalar.grid,
            lambda_h: LambdaH::ZERO,
            method: ReductionMethod::WayI,
            params: DelayParams::default(),
            kind: SpectrumKind::Pair(c),
            warnings: vec![],
        };
        let pair = build_effective_system(&spec, Dimension::One, CutoffSpec::default()).unwrap();
        let x0 = initial_field(Dimension::One, 128, 0.2, 1, &Initial::Noise { amplitude: 0.1 }, 9).unwrap();
        let y0 = Field::zeros(Dimension::One, 128, 0.2, 1).unwrap();
        let p = SimParams::new(0.05, 100).unwrap();
        let a = simulate_scalar(&scalar, &x0, &p).unwrap();
        let b = simulate_pair(&pair, &x0, &y0, &p).unwrap();
        for (u, v) in a.last().components[0].iter().zip(&b.last().components[0]) {
            assert!((u - v).abs() < 1e-12);
        }
        assert!(b.last().components[1].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn ablation_clears_region() {
        let sys = gaussian_system(Dimension::Two, 0.0, 1.0, CutoffSpec::default(), LambdaH::ZERO);
        let f = initial_field(
            Dimension::Two,
            16,
            0.5,
            1,
            &Initial::Seeded {
                region: Region::LeftEdge { width: 100.0 },
                value: 0.3,
            },
            0,
        )
        .unwrap();
        let mut p = SimParams::new(0.1, 3).unwrap();
        let region = Region::Disk {
            center: (4.0, 4.0),
            radius: 1.0,
        };
        p.ablation = Some(Ablation { step: 2, region });
        let t = simulate_scalar(&sys, &f, &p).unwrap();
        let last = t.last();
        let centre = 8 * 16 + 8;
        assert_eq!(last.components[0][centre], 0.0);
        assert!((last.components[0][0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn noise_is_seeded() {
        let a = initial_field(Dimension::Two, 16, 0.5, 1, &Initial::Noise { amplitude: 0.01 }, 4).unwrap();
        let b = initial_field(Dimension::Two, 16, 0.5, 1, &Initial::Noise { amplitude: 0.01 }, 4).unwrap();
        let c = initial_field(Dimension::Two, 16, 0.5, 1, &Initial::Noise { amplitude: 0.01 }, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.max_abs() <= 0.01);
    }

    #[test]
    fn mismatched_fields_rejected() {
        let sys = gaussian_system(Dimension::Two, 1.0, 1.0, CutoffSpec::default(), LambdaH::ZERO);
        let f = Field::zeros(Dimension::One, 64, 0.2, 1).unwrap();
        assert!(matches!(
            simulate_scalar(&sys, &f, &SimParams::new(0.01, 1).unwrap()),
            Err(Error::GridMismatch(_))
        ));
    }
}
