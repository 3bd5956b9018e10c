//! Network sources and the reduction pipeline shared by several commands.

use std::path::PathBuf;

use clap::Args;
use netkernel::eigenflow::{lambda_h_for, sample_eigenvalues, EigenBranches, WavenumberGrid};
use netkernel::lambert::DelayParams;
use netkernel::netspec::{builtin_preset, parse_network, to_config_string, Dimension, NetworkSpec};
use netkernel::reduction::{
    reduce, regularize, ReducedSpectrum, ReductionMethod, RegularizationMode, RegularizationVariant,
};
use netkernel::symbol::assemble_symbol;
use serde_json::{json, Value};

use crate::manifest::sha256_hex;
use crate::CliError;

#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    /// Built-in network (see `presets`).
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Network description file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Spatial dimension; defaults to the network's own.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: Option<u8>,
}

pub struct Source {
    pub spec: NetworkSpec,
    pub label: String,
    pub dimension: Dimension,
    /// SHA-256 of the canonical network text.
    pub hash: String,
}

impl SourceArgs {
    pub fn is_given(&self) -> bool {
        self.preset.is_some() || self.config.is_some()
    }

    pub fn describe(&self) -> String {
        match (&self.preset, &self.config) {
            (Some(p), _) => format!("preset:{p}"),
            (_, Some(c)) => format!("config:{}", c.display()),
            _ => "none".into(),
        }
    }

    pub fn load(&self) -> Result<Source, CliError> {
        let spec = match (&self.preset, &self.config) {
            (Some(name), _) => builtin_preset(name)?,
            (_, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
                parse_network(&text)?
            }
            _ => return Err(CliError::parse("give a network with --preset or --config".into())),
        };
        let dimension = match self.dim {
            Some(d) => Dimension::from_usize(d as usize).expect("range checked by the parser"),
            None => spec.dimension,
        };
        Ok(Source {
            hash: sha256_hex(to_config_string(&spec).as_bytes()),
            label: self.describe(),
            spec,
            dimension,
        })
    }
}

#[derive(Args, Debug, Clone)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// exact, way1 or way2.
    #[arg(long, default_value = "way2")]
    pub method: ReductionMethod,
    /// split, uniform or mollifier; split for exact and way1, uniform for way2
    /// unless given.
    #[arg(long)]
    pub regularization: Option<RegularizationVariant>,
    /// Regularization scale ε.
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Time shift δ.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Largest sampled wavenumber.
    #[arg(long, default_value_t = 40.0)]
    pub s_max: f64,
    /// Wavenumber samples, including 0 and s_max.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Top fraction of the grid used to fit λ_h.
    #[arg(long, default_value_t = 0.25)]
    pub fit_window: f64,
}

impl ReduceArgs {
    pub fn variant(&self) -> RegularizationVariant {
        self.regularization.unwrap_or(match self.method {
            ReductionMethod::WayII => RegularizationVariant::Uniform,
            _ => RegularizationVariant::Split,
        })
    }

    pub fn parameters(&self, dimension: Dimension) -> Value {
        json!({
            "dimension": dimension.as_usize(),
            "method": self.method.as_str(),
            "regularization": self.variant().as_str(),
            "epsilon": self.eps,
            "delta": self.delta,
            "s_max": self.s_max,
            "samples": self.samples,
            "fit_window": self.fit_window,
        })
    }
}

pub struct Reduction {
    /// Branches of the unregularized symbol.
    pub branches: EigenBranches,
    pub spectrum: ReducedSpectrum,
}

pub fn run_reduction(source: &Source, args: &ReduceArgs) -> Result<Reduction, CliError> {
    let grid = WavenumberGrid::new(args.s_max, args.samples)?;
    let params = DelayParams::new(args.delta, args.eps)?;
    let symbol = assemble_symbol(&source.spec, source.dimension)?;
    let branches = sample_eigenvalues(&symbol, grid)?;
    let lambda_h = lambda_h_for(&symbol, &branches, args.fit_window)?;
    let mode = RegularizationMode::new(args.variant(), args.eps)?;
    let spectrum = reduce(&regularize(&symbol, lambda_h, mode), grid, params, args.method)?;
    Ok(Reduction { branches, spectrum })
}
