//! Quantum walks on ℤ and ℝᵈ and the weak limits of their rescaled
//! position distributions.
//!
//! * [`lattice`]: the Hadamard walk on ℤ.
//! * [`grid`] and [`plancherel`]: the walk whose coin flip is the Fourier
//!   transform, simulated on a periodic grid.
//! * [`birkhoff`]: walks whose coin flip is a measure-preserving map,
//!   evolved through their closed form.
//! * [`limits`]: characteristic functions, CDF distances, moments and
//!   convergence sweeps.
//! * [`config`], [`runner`], [`emit`] and [`verify`]: the experiment runner
//!   behind the `qwalk` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod birkhoff;
pub mod config;
pub mod density;
pub mod emit;
pub mod error;
pub mod grid;
pub mod lattice;
pub mod limits;
pub mod measure;
pub mod numeric;
pub mod plancherel;
pub mod psi0;
pub mod runner;
pub mod verify;

pub use density::{Binning, DensityOnGrid};
pub use error::{Error, Result};
pub use grid::{Axes, Direction, Domain, GridSpec, GridWavefunction};
pub use lattice::{Coin, LatticeDistribution, LatticeState};
pub use measure::{EmpiricalMeasure, Point, SampleMeta};
