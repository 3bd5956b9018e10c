use thiserror::Error;

use crate::netspec::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid network specification:\n{0}")]
    InvalidSpec(ValidationReport),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("eigenvalue solver failed to converge at s = {s}")]
    EigenFailure { s: f64 },

    #[error("ambiguous asymptote: {0}")]
    AmbiguousAsymptote(String),

    #[error("complex eigenvalue branches at s = {s}; use the pair reduction instead")]
    ComplexBranches { s: f64 },

    #[error("unsupported spectral structure: {0}")]
    Unsupported(String),

    #[error("time step {dt} exceeds the stability bound {bound}")]
    TimeStep { dt: f64, bound: f64 },

    #[error("simulation unstable at step {step}: max |u| = {max_abs}")]
    Unstable { step: usize, max_abs: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("detection impossible: every Fourier mode is below the denominator floor")]
    AllMasked,

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
