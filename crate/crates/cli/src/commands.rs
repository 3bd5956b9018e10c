//! Subcommand implementations.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use nalgebra::DMatrix;
use netkernel::detect::{detect_kernel_with_floor, DEFAULT_FLOOR};
use netkernel::eigenflow::{eigenvalues, sample_eigenvalues, WavenumberGrid};
use netkernel::io::{encode_grid, encode_pgm, line_profile_csv, read_grid};
use netkernel::netspec::{builtin_preset, to_config_string, Dimension, PRESET_NAMES};
use netkernel::reduction::{build_effective_system, CutoffSpec, EffectiveSystem, ReducedSpectrum, SpectrumKind};
use netkernel::simulate::{
    dominant_wavenumber, front_position, initial_field, mode_amplitude, simulate_full_network, simulate_pair,
    simulate_scalar, stability_bound, Ablation, Field, Initial, PeriodicGrid, Region, SimParams, Trajectory,
};
use netkernel::symbol::assemble_symbol;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::manifest::{sha256_hex, ManifestBuilder, OutputDir};
use crate::source::{run_reduction, ReduceArgs, SourceArgs};
use crate::CliError;

pub struct Global {
    pub out: PathBuf,
    pub strict: bool,
    pub dry_run: bool,
}

impl Global {
    /// Prints the plan and reports whether the caller should stop.
    fn plan(&self, command: &str, source: &str, parameters: &Value) -> bool {
        if self.dry_run {
            let plan = json!({
                "command": command,
                "source": source,
                "out": self.out,
                "parameters": parameters,
            });
            println!("{}", serde_json::to_string_pretty(&plan).expect("plan serializes"));
        }
        self.dry_run
    }

    fn finish(&self, manifest: ManifestBuilder, out: OutputDir) -> Result<(), CliError> {
        for w in &manifest.warnings {
            eprintln!("warning: {w}");
        }
        let strict_failure = self.strict && !manifest.warnings.is_empty();
        let warnings = manifest.warnings.clone();
        let path = manifest.finish(out)?;
        println!("manifest: {}", path.display());
        if strict_failure {
            return Err(CliError::strict(&warnings));
        }
        Ok(())
    }
}

fn default_lattice(dim: Dimension) -> (usize, f64) {
    match dim {
        Dimension::One => (2048, 0.2),
        Dimension::Two => (256, 0.5),
    }
}

#[derive(Args, Debug)]
pub struct PresetsArgs {
    /// Print the full description of one preset.
    #[arg(long)]
    pub show: Option<String>,
}

pub fn presets(args: &PresetsArgs) -> Result<(), CliError> {
    match &args.show {
        Some(name) => print!("{}", to_config_string(&builtin_preset(name)?)),
        None => {
            for name in PRESET_NAMES {
                let spec = builtin_preset(name)?;
                let note = spec.notes.lines().next().unwrap_or("");
                println!("{name:<24} {}D  {note}", spec.dimension.as_usize());
            }
        }
    }
    Ok(())
}

fn kernel_summary(system: &EffectiveSystem) -> Value {
    let mut out = serde_json::Map::new();
    for (name, k) in system.named_kernels() {
        let p = &k.profile;
        let origin = if p.radial { 0 } else { p.values.len() / 2 };
        let (imin, vmin) = p.values[origin..]
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (i, v)| if *v < b.1 { (i, *v) } else { b });
        out.insert(
            name.to_string(),
            json!({
                "at_origin": p.at_origin(),
                "minimum": vmin,
                "minimum_at": imin as f64 * p.spacing,
                "edge": p.values[p.values.len() - 1],
            }),
        );
    }
    Value::Object(out)
}

fn reduced_peak(spectrum: &ReducedSpectrum) -> (f64, f64) {
    (0..spectrum.grid.n)
        .map(|i| (spectrum.grid.point(i), spectrum.growth_rate(i)))
        .fold((0.0, f64::NEG_INFINITY), |b, p| if p.1 > b.1 { p } else { b })
}

pub fn reduce(global: &Global, args: &ReduceArgs) -> Result<(), CliError> {
    let source = args.source.load()?;
    let parameters = args.parameters(source.dimension);
    if global.plan("reduce", &source.label, &parameters) {
        return Ok(());
    }
    let mut manifest = ManifestBuilder::new("reduce");
    let r = run_reduction(&source, args)?;
    let system = build_effective_system(&r.spectrum, source.dimension, CutoffSpec::default())?;

    let mut out = OutputDir::create(&global.out)?;
    out.write("spectrum.csv", r.spectrum.to_csv().as_bytes())?;
    out.write("branches.csv", r.branches.to_csv().as_bytes())?;
    for (name, k) in system.named_kernels() {
        out.write(&format!("kernel_{name}.csv"), k.profile.to_csv().as_bytes())?;
    }

    let lambda_max0 = r.branches.lambda_max[0];
    let mu0 = r.spectrum.growth_rate(0) - r.spectrum.lambda_h.evaluate(0.0);
    let (peak_s, peak) = reduced_peak(&r.spectrum);
    let (imax, lmax) = r.branches.argmax();
    let xi_c = match &r.spectrum.kind {
        SpectrumKind::Pair(c) if c.complex.iter().any(|b| *b) => Some(c.xi_c),
        _ => None,
    };
    println!("network:           {} ({})", source.label, source.dimension);
    println!(
        "lambda_h:          degree {} coefficient {:.6}  (operator {})",
        r.spectrum.lambda_h.degree,
        r.spectrum.lambda_h.coefficient,
        system.operator_description()
    );
    println!("lambda_max(0):     {lambda_max0:.6e}");
    println!("mu_max(0):         {mu0:.6e}");
    println!("dispersion peak:   {lmax:.6} at s = {:.4}", r.branches.grid.point(imax));
    println!("reduced peak:      {peak:.6} at s = {peak_s:.4}");
    match xi_c {
        Some(x) => println!("xi_c:              {x:.6}"),
        None => println!("xi_c:              none"),
    }
    if let Some(d) = system.dual_route_max_diff {
        println!("dual-route diff:   {d:.3e}");
    }
    for (name, k) in system.named_kernels() {
        println!("{name}(0):              {:.6e}", k.profile.at_origin());
    }

    manifest.config_hash = source.hash;
    manifest.source = source.label;
    manifest.parameters = parameters;
    manifest.summary = json!({
        "lambda_h": {"degree": r.spectrum.lambda_h.degree, "coefficient": r.spectrum.lambda_h.coefficient},
        "lambda_max_0": lambda_max0,
        "mu_max_0": mu0,
        "dispersion_peak": {"s": r.branches.grid.point(imax), "value": lmax},
        "reduced_peak": {"s": peak_s, "value": peak},
        "xi_c": xi_c,
        "dual_route_max_diff": system.dual_route_max_diff,
        "kernels": kernel_summary(&system),
    });
    manifest.warnings = r.spectrum.warnings.clone();
    global.finish(manifest, out)
}

#[derive(Args, Debug, Clone)]
pub struct LatticeArgs {
    /// Points per side; 2048 in 1D and 256 in 2D unless given.
    #[arg(long)]
    pub n: Option<usize>,
    /// Grid spacing; 0.2 in 1D and 0.5 in 2D unless given.
    #[arg(long)]
    pub dx: Option<f64>,
    /// Random seed for initial noise and ablation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl LatticeArgs {
    fn resolve(&self, dim: Dimension) -> Result<PeriodicGrid, CliError> {
        let (n, dx) = default_lattice(dim);
        Ok(PeriodicGrid::new(dim, self.n.unwrap_or(n), self.dx.unwrap_or(dx))?)
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub reduce: ReduceArgs,
    /// Reduced spectrum written by `reduce`, instead of a network.
    #[arg(long, conflicts_with_all = ["preset", "config"], requires = "dim")]
    pub spectrum: Option<PathBuf>,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Amplitude of uniform initial noise.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    /// Time step; 0.9 of the stability bound unless given.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Snapshot cadence in steps; a tenth of the run unless given.
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Saturation level of the cutoff.
    #[arg(long, default_value_t = 1.0)]
    pub u_star: f64,
    /// Run the linear equation without cutoff.
    #[arg(long)]
    pub no_cutoff: bool,
    /// Only let the convolution term raise the field.
    #[arg(long)]
    pub irreversible: bool,
    /// Start from a band of height u* along one edge.
    #[arg(long, value_enum)]
    pub seed_edge: Option<Edge>,
    /// Width of the seeded band in grid cells.
    #[arg(long, default_value_t = 8)]
    pub seed_width: usize,
    /// Start from a `.grid` file.
    #[arg(long, conflicts_with = "seed_edge")]
    pub initial: Option<PathBuf>,
    /// Zero a random disk part-way through the run.
    #[arg(long)]
    pub ablate: bool,
    /// Step of the ablation; half the run unless given.
    #[arg(long)]
    pub ablate_step: Option<usize>,
    /// Ablation radius; an eighth of the box unless given.
    #[arg(long)]
    pub ablate_radius: Option<f64>,
    /// Reaction terms below this magnitude are dropped.
    #[arg(long, default_value_t = 0.0)]
    pub flush: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Edge {
    Left,
}

struct SimSource {
    spectrum: ReducedSpectrum,
    dimension: Dimension,
    label: String,
    hash: String,
}

fn load_spectrum(args: &SimulateArgs) -> Result<SimSource, CliError> {
    match &args.spectrum {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
            let dim = args.reduce.source.dim.expect("clap requires --dim with --spectrum");
            Ok(SimSource {
                spectrum: ReducedSpectrum::from_csv(&text)?,
                dimension: Dimension::from_usize(dim as usize).expect("range checked by the parser"),
                label: format!("spectrum:{}", path.display()),
                hash: sha256_hex(text.as_bytes()),
            })
        }
        None => {
            let source = args.reduce.source.load()?;
            let r = run_reduction(&source, &args.reduce)?;
            Ok(SimSource {
                spectrum: r.spectrum,
                dimension: source.dimension,
                label: source.label,
                hash: source.hash,
            })
        }
    }
}

fn split_components(field: &Field) -> Vec<Field> {
    field
        .components
        .iter()
        .map(|c| Field {
            components: vec![c.clone()],
            ..field.clone()
        })
        .collect()
}

pub fn simulate(global: &Global, args: &SimulateArgs) -> Result<(), CliError> {
    let label = match &args.spectrum {
        Some(p) => format!("spectrum:{}", p.display()),
        None => args.reduce.source.describe(),
    };
    let mut parameters = json!({
        "reduction": if args.spectrum.is_none() { Value::Null } else { json!("from file") },
        "n": args.lattice.n,
        "dx": args.lattice.dx,
        "dt": args.dt,
        "steps": args.steps,
        "record_every": args.record_every,
        "seed": args.lattice.seed,
        "noise": args.noise,
        "u_star": if args.no_cutoff { Value::Null } else { json!(args.u_star) },
        "irreversible": args.irreversible,
        "seed_edge": args.seed_edge.map(|_| "left"),
        "seed_width": args.seed_width,
        "initial": args.initial,
        "ablate": args.ablate,
        "flush": args.flush,
    });
    if args.spectrum.is_none() {
        if !args.reduce.source.is_given() {
            return Err(CliError::parse("give --preset, --config or --spectrum".into()));
        }
        let dim = args.reduce.source.dim.map_or(Value::Null, |d| json!(d));
        let mut r = args.reduce.parameters(Dimension::One);
        r["dimension"] = dim;
        parameters["reduction"] = r;
    }
    if global.plan("simulate", &label, &parameters) {
        return Ok(());
    }
    let mut manifest = ManifestBuilder::new("simulate");
    let src = load_spectrum(args)?;
    let cutoff = if args.no_cutoff {
        CutoffSpec::disabled()
    } else {
        CutoffSpec::new(args.u_star)?
    };
    let system = build_effective_system(&src.spectrum, src.dimension, cutoff)?;
    let grid = args.lattice.resolve(src.dimension)?;
    let bound = stability_bound(&system, &grid);
    let dt = args.dt.unwrap_or(0.9 * bound);
    let pair = matches!(src.spectrum.kind, SpectrumKind::Pair(_));
    let count = if pair { 2 } else { 1 };

    let mut params = SimParams::new(dt, args.steps)?;
    params.record_every = args.record_every.unwrap_or((args.steps / 10).max(1));
    params.seed = args.lattice.seed;
    params.irreversible = args.irreversible;
    params.flush = args.flush;
    params.initial = match (&args.initial, args.seed_edge) {
        (Some(path), _) => Initial::Given(read_grid(path)?),
        (None, Some(Edge::Left)) => Initial::Seeded {
            region: Region::LeftEdge {
                width: args.seed_width as f64 * grid.spacing,
            },
            value: args.u_star,
        },
        (None, None) => Initial::Noise { amplitude: args.noise },
    };
    let box_length = grid.box_length();
    if args.ablate {
        let mut rng = ChaCha8Rng::seed_from_u64(args.lattice.seed ^ 0xab1a7e);
        let y = if src.dimension == Dimension::Two {
            rng.random_range(0.0..box_length)
        } else {
            0.0
        };
        let center = (rng.random_range(0.0..box_length), y);
        params.ablation = Some(Ablation {
            step: args.ablate_step.unwrap_or(args.steps / 2),
            region: Region::Disk {
                center,
                radius: args.ablate_radius.unwrap_or(box_length / 8.0),
            },
        });
    }

    let (n, h) = (grid.nx, grid.spacing);
    let trajectory: Trajectory = if pair {
        let parts = match &params.initial {
            Initial::Given(f) => split_components(f),
            other => vec![
                initial_field(src.dimension, n, h, 1, other, params.seed)?,
                initial_field(src.dimension, n, h, 1, other, params.seed.wrapping_add(1))?,
            ],
        };
        if parts.len() != 2 {
            return Err(CliError::parse(format!(
                "a pair system needs a two-component initial field, got {}",
                parts.len()
            )));
        }
        simulate_pair(&system, &parts[0], &parts[1], &params)?
    } else {
        let f0 = initial_field(src.dimension, n, h, count, &params.initial, params.seed)?;
        simulate_scalar(&system, &f0, &params)?
    };

    let names: &[&str] = if pair { &["x", "y"] } else { &["u"] };
    let mut out = OutputDir::create(&global.out)?;
    for (i, snap) in trajectory.snapshots.iter().enumerate() {
        out.write_at(&format!("snapshot_{i:04}.grid"), &encode_grid(snap), Some(snap.time))?;
        for (c, name) in names.iter().enumerate() {
            match src.dimension {
                Dimension::One => out.write_at(
                    &format!("snapshot_{i:04}_{name}.csv"),
                    line_profile_csv(snap, c).as_bytes(),
                    Some(snap.time),
                )?,
                Dimension::Two => out.write_at(
                    &format!("snapshot_{i:04}_{name}.pgm"),
                    &encode_pgm(snap, c),
                    Some(snap.time),
                )?,
            }
        }
    }

    let last = trajectory.last();
    let (peak_s, _) = reduced_peak(&src.spectrum);
    let dominant = dominant_wavenumber(last, 0).ok();
    let front = front_position(last, 0, 0.5 * args.u_star);
    println!("system:            {}", if pair { "pair" } else { "scalar" });
    println!("dt:                {dt:.6e} (bound {bound:.6e})");
    println!("final time:        {:.6}", last.time);
    println!("max |u|:           {:.6e}", trajectory.max_abs);
    if let Some(d) = dominant {
        println!(
            "dominant |k|:      {:.4} ± {:.4} (reduced peak {peak_s:.4})",
            d.wavenumber, d.bin_width
        );
    }
    if args.seed_edge.is_some() {
        match front {
            Some(x) => println!("front position:    {x:.4}"),
            None => println!("front position:    none"),
        }
    }

    manifest.config_hash = src.hash;
    manifest.source = src.label;
    parameters["resolved"] = json!({
        "dimension": src.dimension.as_usize(),
        "n": n,
        "dx": h,
        "dt": dt,
        "record_every": params.record_every,
        "ablation": params.ablation.map(|a| match a.region {
            Region::Disk { center, radius } => json!({"step": a.step, "center": [center.0, center.1], "radius": radius}),
            Region::LeftEdge { width } => json!({"step": a.step, "width": width}),
        }),
    });
    manifest.parameters = parameters;
    manifest.summary = json!({
        "kind": if pair { "pair" } else { "scalar" },
        "stability_bound": bound,
        "kernel_l1": trajectory.kernel_l1,
        "max_abs": trajectory.max_abs,
        "final_time": last.time,
        "dominant_wavenumber": dominant.map(|d| json!({"value": d.wavenumber, "bin_width": d.bin_width})),
        "reduced_peak": peak_s,
        "front_position": front,
    });
    manifest.warnings = src
        .spectrum
        .warnings
        .iter()
        .chain(&trajectory.warnings)
        .cloned()
        .collect();
    global.finish(manifest, out)
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// One Fourier mode along the leading eigenvector.
    Single,
    /// Random initial data; reports the dominant wavenumber.
    Noise,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value = "single")]
    pub mode: OracleMode,
    /// Shorthand for `--mode noise`.
    #[arg(long)]
    pub noise: bool,
    /// Amplitude of uniform initial noise in noise mode.
    #[arg(long, default_value_t = 0.01)]
    pub amplitude: f64,
    /// Wavenumber of the single mode, rounded to the nearest lattice mode.
    #[arg(long, default_value_t = 1.0)]
    pub xi: f64,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    /// Steps; 20 in single mode and 400 in noise mode unless given.
    #[arg(long)]
    pub steps: Option<usize>,
}

/// Unit null vector of `b − λI`.
fn leading_eigenvector(b: &DMatrix<f64>, lambda: f64) -> Vec<f64> {
    let shifted = b - DMatrix::identity(b.nrows(), b.ncols()) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (i, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, v)| if *v < b.1 { (i, *v) } else { b });
    v_t.row(i).iter().copied().collect()
}

pub fn oracle(global: &Global, args: &OracleArgs) -> Result<(), CliError> {
    let mode = if args.noise { OracleMode::Noise } else { args.mode };
    let steps = args.steps.unwrap_or(if mode == OracleMode::Single { 20 } else { 400 });
    let parameters = json!({
        "mode": match mode { OracleMode::Single => "single", OracleMode::Noise => "noise" },
        "xi": args.xi,
        "n": args.lattice.n,
        "dx": args.lattice.dx,
        "dt": args.dt,
        "steps": steps,
        "seed": args.lattice.seed,
        "amplitude": args.amplitude,
        "dimension": args.source.dim,
    });
    if global.plan("oracle", &args.source.describe(), &parameters) {
        return Ok(());
    }
    let mut manifest = ManifestBuilder::new("oracle");
    let source = args.source.load()?;
    let dim = source.dimension;
    let grid = args.lattice.resolve(dim)?;
    let symbol = assemble_symbol(&source.spec, dim)?;
    let count = source.spec.len();
    let mut params = SimParams::new(args.dt, steps)?;
    params.seed = args.lattice.seed;
    let mut out = OutputDir::create(&global.out)?;

    let summary = match mode {
        OracleMode::Single => {
            let m = ((args.xi * grid.box_length() / (2.0 * PI)).round() as i64).max(1);
            let xi = m as f64 * grid.mode_spacing();
            let b = symbol.evaluate(xi);
            let vals = eigenvalues(&b).ok_or(netkernel::Error::EigenFailure { s: xi })?;
            let top =
                vals.iter().copied().fold(
                    Complex64::new(f64::NEG_INFINITY, 0.0),
                    |a, z| if z.re > a.re { z } else { a },
                );
            let real = top.im.abs() <= 1e-12 * top.norm().max(1.0);
            let v = if real {
                leading_eigenvector(&b, top.re)
            } else {
                vec![1.0; count]
            };
            let mut u0 = Field::zeros(dim, grid.nx, grid.spacing, count)?;
            for (c, comp) in u0.components.iter_mut().enumerate() {
                for (i, u) in comp.iter_mut().enumerate() {
                    *u = v[c] * (xi * grid.position(i).0).cos();
                }
            }
            // Complex leading pairs oscillate, so only the second half is
            // measured to let the leading pair dominate.
            params.record_every = if real { steps.max(1) } else { (steps / 2).max(1) };
            let tr = simulate_full_network(&source.spec, &u0, &params)?;
            let amp = |f: &Field| {
                (0..count)
                    .map(|c| mode_amplitude(f, c, (m, 0)).powi(2))
                    .sum::<f64>()
                    .sqrt()
            };
            let (a, z) = (&tr.snapshots[tr.snapshots.len() - 2], tr.last());
            let rate = (amp(z) / amp(a)).ln() / (z.time - a.time);
            let rel = (rate - top.re).abs() / top.re.abs().max(f64::MIN_POSITIVE);
            println!("mode:              m = {m}, |k| = {xi:.6}");
            println!(
                "lambda_max:        {:.10e}{}",
                top.re,
                if real { "" } else { " (complex pair)" }
            );
            println!("measured rate:     {rate:.10e}");
            println!("relative error:    {rel:.3e}");
            out.write(
                "growth.csv",
                format!(
                    "xi,lambda_max,measured,relative_error\n{xi:.17e},{:.17e},{rate:.17e},{rel:.17e}\n",
                    top.re
                )
                .as_bytes(),
            )?;
            json!({"xi": xi, "mode_index": m, "lambda_max": top.re, "complex": !real, "measured": rate, "relative_error": rel})
        }
        OracleMode::Noise => {
            let u0 = initial_field(
                dim,
                grid.nx,
                grid.spacing,
                count,
                &Initial::Noise {
                    amplitude: args.amplitude,
                },
                params.seed,
            )?;
            let tr = simulate_full_network(&source.spec, &u0, &params)?;
            let branches = sample_eigenvalues(&symbol, WavenumberGrid::new(grid.max_wavenumber(), 4097)?)?;
            let (imax, lmax) = branches.argmax();
            let argmax = branches.grid.point(imax);
            let d = dominant_wavenumber(tr.last(), 0)?;
            println!("dominant |k|:      {:.4} (bin width {:.4})", d.wavenumber, d.bin_width);
            println!("argmax lambda_max: {argmax:.4} (lambda_max = {lmax:.6})");
            println!(
                "difference:        {:.2} bins",
                (d.wavenumber - argmax).abs() / d.bin_width
            );
            out.write("final.grid", &encode_grid(tr.last()))?;
            if dim == Dimension::Two {
                out.write("final_0.pgm", &encode_pgm(tr.last(), 0))?;
            } else {
                out.write("final_0.csv", line_profile_csv(tr.last(), 0).as_bytes())?;
            }
            json!({"dominant_wavenumber": d.wavenumber, "bin_width": d.bin_width, "confidence": d.confidence, "argmax": argmax, "lambda_max_peak": lmax})
        }
    };

    manifest.config_hash = source.hash;
    manifest.source = source.label;
    manifest.parameters = parameters;
    manifest.summary = summary;
    global.finish(manifest, out)
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    /// Snapshot at time t.
    pub before: PathBuf,
    /// Snapshot at time t + δ.
    pub after: PathBuf,
    /// Time between the snapshots.
    #[arg(long)]
    pub delta: f64,
    /// Modes with |û(t)| below this fraction of the largest are masked.
    #[arg(long, default_value_t = DEFAULT_FLOOR)]
    pub floor: f64,
}

pub fn detect(global: &Global, args: &DetectArgs) -> Result<(), CliError> {
    let parameters = json!({
        "before": args.before,
        "after": args.after,
        "delta": args.delta,
        "floor": args.floor,
    });
    let label = format!("{} {}", args.before.display(), args.after.display());
    if global.plan("detect", &label, &parameters) {
        return Ok(());
    }
    let mut manifest = ManifestBuilder::new("detect");
    let read = |p: &PathBuf| std::fs::read(p).map_err(|e| CliError::parse(format!("cannot read {}: {e}", p.display())));
    let (b, a) = (read(&args.before)?, read(&args.after)?);
    let before = netkernel::io::decode_grid(&b)?;
    let after = netkernel::io::decode_grid(&a)?;
    let result = detect_kernel_with_floor(&before, &after, args.delta, args.floor)?;

    let grid = result.grid();
    let n = grid.nx;
    let mut kernel_csv = String::from("x,value\n");
    for j in 0..n as i64 {
        let offset = j - n as i64 / 2;
        let ix = offset.rem_euclid(n as i64) as usize;
        kernel_csv.push_str(&format!(
            "{:.17e},{:.17e}\n",
            offset as f64 * grid.spacing,
            result.kernel[ix]
        ));
    }
    let mut out = OutputDir::create(&global.out)?;
    out.write("detected_spectrum.csv", result.spectrum_csv().as_bytes())?;
    out.write("detected_kernel.csv", kernel_csv.as_bytes())?;
    out.write("mask_report.txt", result.mask_report().as_bytes())?;
    print!("{}", result.mask_report());

    let mut hasher_input = b;
    hasher_input.extend_from_slice(&a);
    manifest.config_hash = sha256_hex(&hasher_input);
    manifest.source = label;
    manifest.parameters = parameters;
    manifest.summary = json!({
        "modes": result.spectrum.len(),
        "masked": result.masked_count(),
        "imaginary_residue": result.imaginary_residue,
    });
    if result.masked_count() > 0 {
        manifest.warnings.push(format!(
            "{} of {} modes masked",
            result.masked_count(),
            result.spectrum.len()
        ));
    }
    global.finish(manifest, out)
}
