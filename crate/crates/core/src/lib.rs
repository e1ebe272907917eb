//! Wannier-Stark ladders and Bloch-Zener oscillations in driven
//! non-Hermitian two-band lattices.
//!
//! * [`lattice`]: continuous-time Bloch Hamiltonians and their truncated
//!   real-space operators under a dc force.
//! * [`spectrum`]: the ladder offset `θ` from the k-ordered exponential, its
//!   WKB estimate, dense-diagonalization cross-checks and gain/loss sweeps.
//! * [`dynamics`]: fixed-step RK4 propagation with overflow-safe
//!   renormalization and periodicity classification of the revival trace.
//! * [`walk`]: the two-step discrete-time photonic quantum walk with a
//!   complex phase ramp, its Floquet quasi-energies and pulse dynamics.

pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod spectrum;
pub mod walk;

pub use error::{Error, Result};
pub use linalg::{Mat2, C64};

pub type BlochMatrix = Mat2;
