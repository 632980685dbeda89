//! Exact diagonalization and dynamics of interacting bosons on a ring
//! stirred by a narrow barrier.
//!
//! Units throughout: energies in E₀ = 2π²ħ²/(ML²), lengths in the ring
//! circumference L, times in ħ/E₀. [`units`] converts to and from SI.

pub mod analytic;
pub mod basis;
pub mod cli;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod hamiltonian;
pub mod observables;
pub mod operator;
pub mod params;
pub mod spectra;
pub mod units;

pub use basis::{FockBasis, FockState};
pub use eigen::{EigenResult, SolverConfig};
pub use error::{Error, Result};
pub use operator::{LinearOperator, SparseHermitianOperator};
pub use params::{ModeWindow, ModelParams};
