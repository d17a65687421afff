//! Aperiodic point patterns generated by hull dynamics, their hopping
//! Hamiltonians, spectral gaps with topological labels, and edge spectra.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod edge;
pub mod error;
pub mod gap_label;
pub mod hamiltonian;
pub mod hull;
pub mod parallel;
pub mod pattern;
pub mod spectral;

pub use error::{Error, Result};
pub use parallel::Parallelism;
