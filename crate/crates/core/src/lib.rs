//! Numerical laboratory for time-dependent few-level quantum systems.
//!
//! The crate is organized as a pipeline:
//!
//! * [`numkernel`] - dense complex linear algebra (Hermitian eigensolver,
//!   unitary exponentials, eigenvector phase alignment),
//! * [`models`] - the zoo of time-dependent Hamiltonians under study,
//! * [`propagate`] - exact-unitary integration of the Schrödinger equation,
//! * [`diagnostics`] - gauge-fixed eigenpaths, slow amplitudes, error
//!   integrals, resonance indicators and slow-evolution time bounds.
//!
//! All energies and times are in natural units (ħ = 1).

pub mod diagnostics;
pub mod error;
pub mod models;
pub mod numkernel;
pub mod propagate;

pub use error::{LabError, Result};
