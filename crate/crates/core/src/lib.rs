//! Engines for a discrete-time quantum walker coupled to on-site spin-1/2
//! systems.
//!
//! The walker hops on a one-dimensional lattice under a coin rotation
//! `exp(-iθX)` and a coin-conditioned shift. Whenever it sits on site `n` it
//! rotates the local spin by `exp(-iφX_n)`. Every `X_n` commutes with the step
//! operator, so the dynamics splits into `2^N` independent "spin sectors" in
//! which the walker sees a binary landscape of phases `e^{±iφ}`.
//!
//! Three evolution engines are provided and cross-check each other:
//!
//! * [`walk`] + [`ensemble`]: single-sector evolution and Monte-Carlo (or
//!   exhaustive) averaging over sectors.
//! * [`mps`]: a matrix-product-state simulation of the full walker+spin state
//!   on a 6-dimensional local basis, with entanglement and spin observables.
//! * [`exact`]: brute-force evolution of the `2·N·2^N` state vector for small
//!   lattices.
//!
//! [`spectrum`] builds the per-sector step unitary on a ring and extracts its
//! quasi-energies and eigenstate participation ratios.
//!
//! The crate is `no_std` and only needs `alloc`. Parallel drivers plug in
//! through [`exec::Join`].

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod ensemble;
pub mod error;
pub mod exact;
pub mod exec;
pub mod lattice;
mod linalg;
pub mod mps;
pub mod observe;
pub mod spectrum;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use lattice::{Boundary, ProbabilityDistribution};
pub use walk::{SectorState, SpinSector, WalkParams};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;

/// Pauli axis for spin observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// 2x2 Pauli matrix, row-major.
    pub fn pauli(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Axis::X => [[o, l], [l, o]],
            Axis::Y => [[o, -i], [i, o]],
            Axis::Z => [[l, o], [o, -l]],
        }
    }
}
