use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("qubit index {index} out of range for a register of {size} qubits")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("pauli term acts on {got} qubits but the register has {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{size} qubits exceeds the limit of {limit} for {what}")]
    TooLarge {
        size: usize,
        limit: usize,
        what: &'static str,
    },

    #[error("coefficient must be finite, got {0}")]
    NonFinite(f64),

    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid contact: {0}")]
    InvalidContact(String),

    #[error("invalid run configuration: {0}")]
    InvalidRun(String),

    #[error("integration step too large: |rhs| * dt = {0:.3e} (must be below 0.1)")]
    Unstable(f64),

    #[error("density matrix lost positivity at t = {time}: minimum eigenvalue {eigenvalue:.3e}")]
    PositivityViolated { time: f64, eigenvalue: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_index(index: usize, size: usize) -> Result<()> {
    if index < size {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index, size })
    }
}
