//! First-order Lie-Trotter steps `dU = prod_s exp(-i c_s P_s dt)` and the
//! exact propagator `exp(-i H t)` used to check them.
//!
//! Units: hbar = 1, energies in meV and times in hbar/meV, so
//! `angle = coeff * dt` is dimensionless.

use num_complex::Complex64;

use crate::dense;
use crate::error::{Error, Result};
use crate::pauli::{PauliHamiltonian, PauliMasks, PauliTerm, DENSE_LIMIT};
use crate::statevector::StateVector;
use crate::CMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    pub term: PauliTerm,
    /// `coeff * dt`.
    pub angle: f64,
    masks: PauliMasks,
}

/// One Trotter step, ready to apply. Identity terms only contribute a global
/// phase and are left out; their total coefficient is kept so exact
/// comparisons can restore the phase.
#[derive(Clone, Debug, PartialEq)]
pub struct TrotterPlan {
    rotations: Vec<Rotation>,
    dt: f64,
    num_qubits: usize,
    identity_coeff: f64,
}

/// Builds the step for time step `dt`, one rotation per non-identity term in
/// Hamiltonian order.
pub fn build_step(h: &PauliHamiltonian, dt: f64) -> Result<TrotterPlan> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    let rotations = h
        .terms()
        .iter()
        .filter(|t| !t.is_identity())
        .map(|t| Rotation {
            term: t.clone(),
            angle: t.coeff() * dt,
            masks: t.masks(),
        })
        .collect();
    Ok(TrotterPlan {
        rotations,
        dt,
        num_qubits: h.num_qubits(),
        identity_coeff: h.identity_coefficient(),
    })
}

impl TrotterPlan {
    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    /// Phase `exp(-i c_I dt steps)` dropped by `steps` applications.
    pub fn dropped_phase(&self, steps: usize) -> Complex64 {
        Complex64::from_polar(1.0, -self.identity_coeff * self.dt * steps as f64)
    }

    /// Applies the rotations in order.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::LengthMismatch {
                expected: state.num_qubits(),
                got: self.num_qubits,
            });
        }
        for r in &self.rotations {
            state.rotate(r.masks, r.angle);
        }
        Ok(())
    }
}

/// `exp(-i H t)` from the eigendecomposition of the dense Hamiltonian.
pub fn exact_propagator_oracle(h: &PauliHamiltonian, t: f64) -> Result<CMatrix> {
    if h.num_qubits() > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: h.num_qubits(),
            limit: DENSE_LIMIT,
            what: "the exact propagator",
        });
    }
    let (values, vectors) = dense::hermitian_eigen(&h.to_dense()?);
    let dim = values.len();
    let phases = CMatrix::from_fn(dim, dim, |r, c| {
        vectors[(r, c)] * Complex64::from_polar(1.0, -values[c] * t)
    });
    Ok(phases * vectors.adjoint())
}

/// Applies a dense operator to a state, returning raw amplitudes.
pub fn apply_dense(u: &CMatrix, state: &StateVector) -> Vec<Complex64> {
    let v = nalgebra::DVector::from_column_slice(state.amplitudes());
    (u * v).iter().copied().collect()
}
