//! Stochastic quantum-trajectory simulation of open fermionic chains.
//!
//! Particles enter and leave the chain through contacts attached to its end
//! sites. Each contact acts through a mid-circuit measurement of the attached
//! qubit followed by a conditional bit flip, so the whole process runs on a
//! plain state vector: no bath qubits, no density matrix. Ensembles of such
//! trajectories are checked against a dense Lindblad master-equation
//! integrator.
//!
//! Module map:
//!
//! - [`pauli`]: Pauli strings and qubit Hamiltonians.
//! - [`fermion_model`]: spinless-fermion chain, its Jordan-Wigner image and a
//!   Fock-space matrix oracle.
//! - [`statevector`]: amplitudes, Pauli rotations, projective measurement and reset.
//! - [`trotter`]: first-order product-formula steps and an exact propagator.
//! - [`open_system`]: contact model, single trajectories, trajectory ensembles.
//! - [`lindblad`]: density-matrix oracle for the master equation.
//! - [`harness`]: scenario configuration, presets and file output.

pub mod error;
pub mod exec;
pub mod fermion_model;
pub mod harness;
pub mod lindblad;
pub mod open_system;
pub mod pauli;
pub mod statevector;
pub mod trotter;

mod dense;

pub use error::{Error, Result};
pub use exec::Execution;
pub use fermion_model::{build_chain_hamiltonian, fock_matrix_oracle, number_operator, ChainSpec};
pub use lindblad::{DensityMatrix, JumpOperatorSet};
pub use open_system::{ContactSpec, EnsembleResult, RunConfig};
pub use pauli::{Pauli, PauliHamiltonian, PauliTerm};
pub use statevector::{ResetEvent, RngStream, StateVector};
pub use trotter::TrotterPlan;

pub use num_complex::Complex64;

/// Dense complex matrix used by the oracles.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
