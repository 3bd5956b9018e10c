//! Reduction of linear reaction–diffusion networks to effective nonlocal
//! kernels.
//!
//! The pipeline runs in stages, one module each:
//!
//! 1. [`netspec`] describes the network: components, transport and couplings.
//! 2. [`symbol`] assembles the Fourier-space matrix family `B(s)`.
//! 3. [`eigenflow`] tracks the eigenvalue branches of `B(s)`, fits the
//!    leading asymptote `λ_h` and finds real/complex collisions.
//! 4. [`reduction`] regularizes the symbol, maps eigenvalues through the
//!    Lambert-W relations of [`lambert`] and inverts the reduced spectrum to
//!    real-space kernels.
//! 5. [`simulate`] integrates the effective equations and the original
//!    network on periodic grids.
//! 6. [`detect`] recovers a kernel spectrum from two snapshots.

pub mod detect;
pub mod eigenflow;
pub mod error;
pub mod expm;
pub mod io;
pub mod lambert;
pub mod netspec;
pub mod reduction;
pub mod simulate;
pub mod symbol;

pub use error::{Error, Result};
