//! Choi-echo diagnostics for single-spin probes in spin-1/2 chains.
//!
//! The crate builds the mixed-field Ising, random-field Heisenberg and
//! defected XXZ Hamiltonians, extracts the reduced channel of the first
//! spin, and compares Choi-state purities (the "Choi echo") and subsystem
//! purities against level-spacing-ratio statistics.

pub mod channel;
pub mod echo;
pub mod error;
pub mod models;
pub mod rng;
pub mod spectra;
pub mod spinops;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64;
