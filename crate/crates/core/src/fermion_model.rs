//! Spinless-fermion chain with nearest-neighbour hopping and interaction,
//!
//! `H = gamma * sum_i (c+_i c_{i+1} + h.c.) + v * sum_i n_i n_{i+1}`,
//!
//! mapped onto qubits by Jordan-Wigner with `|1>` meaning "occupied" and
//! `n_q = (I - Z_q) / 2`. Hopping on bond `(q, q+1)` becomes
//! `(gamma/2)(X_q X_{q+1} + Y_q Y_{q+1})`; the interaction becomes
//! `(v/4)(I - Z_q)(I - Z_{q+1})`.

use num_complex::Complex64;

use crate::dense;
use crate::error::{check_index, Error, Result};
use crate::pauli::{Pauli, PauliHamiltonian, PauliTerm, DENSE_LIMIT};
use crate::CMatrix;

/// Chain geometry and couplings. Energies in meV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainSpec {
    pub sites: usize,
    /// Hopping integral.
    pub hopping: f64,
    /// Nearest-neighbour interaction strength.
    pub interaction: f64,
}

impl ChainSpec {
    pub fn new(sites: usize, hopping: f64, interaction: f64) -> Result<Self> {
        let spec = ChainSpec {
            sites,
            hopping,
            interaction,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 1 {
            return Err(Error::InvalidChain("chain needs at least one site".into()));
        }
        if !self.hopping.is_finite() {
            return Err(Error::InvalidChain(format!(
                "hopping must be finite, got {}",
                self.hopping
            )));
        }
        if !self.interaction.is_finite() {
            return Err(Error::InvalidChain(format!(
                "interaction must be finite, got {}",
                self.interaction
            )));
        }
        Ok(())
    }
}

/// Jordan-Wigner image of the chain Hamiltonian.
///
/// Term order: all hopping strings first (bond by bond, XX before YY), then
/// the interaction strings bond by bond (identity, `Z_q`, `Z_{q+1}`,
/// `Z_q Z_{q+1}`), with repeated strings merged into their first slot. The
/// identity term is kept so the spectrum matches [`fock_matrix_oracle`].
pub fn build_chain_hamiltonian(spec: &ChainSpec) -> Result<PauliHamiltonian> {
    spec.validate()?;
    let l = spec.sites;
    let mut h = PauliHamiltonian::new(l);
    let pair = |coeff: f64, a: Pauli, b: Pauli, q: usize| {
        let mut letters = vec![Pauli::I; l];
        letters[q] = a;
        letters[q + 1] = b;
        PauliTerm::new(coeff, letters)
    };

    if spec.hopping != 0.0 {
        let c = spec.hopping / 2.0;
        for q in 0..l.saturating_sub(1) {
            h.add_term(pair(c, Pauli::X, Pauli::X, q)?)?;
            h.add_term(pair(c, Pauli::Y, Pauli::Y, q)?)?;
        }
    }
    if spec.interaction != 0.0 {
        let c = spec.interaction / 4.0;
        for q in 0..l.saturating_sub(1) {
            h.add_term(PauliTerm::identity(c, l)?)?;
            h.add_term(PauliTerm::single(-c, Pauli::Z, q, l)?)?;
            h.add_term(PauliTerm::single(-c, Pauli::Z, q + 1, l)?)?;
            h.add_term(pair(c, Pauli::Z, Pauli::Z, q)?)?;
        }
    }
    h.prune_zeros();
    Ok(h)
}

/// `n_q = I/2 - Z_q/2`.
pub fn number_operator(q: usize, num_qubits: usize) -> Result<PauliHamiltonian> {
    check_index(q, num_qubits)?;
    PauliHamiltonian::from_terms(
        num_qubits,
        [
            PauliTerm::identity(0.5, num_qubits)?,
            PauliTerm::single(-0.5, Pauli::Z, q, num_qubits)?,
        ],
    )
}

/// `sum_q n_q` as a Pauli sum.
pub fn total_number_operator(num_qubits: usize) -> Result<PauliHamiltonian> {
    let mut h = PauliHamiltonian::new(num_qubits);
    for q in 0..num_qubits {
        for t in number_operator(q, num_qubits)?.terms() {
            h.add_term(t.clone())?;
        }
    }
    Ok(h)
}

fn dense_guard(num_qubits: usize, what: &'static str) -> Result<()> {
    if num_qubits > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: num_qubits,
            limit: DENSE_LIMIT,
            what,
        });
    }
    Ok(())
}

/// Annihilation operator `c_l` with its Jordan-Wigner sign string:
/// `c_l |j> = (-1)^{#occupied sites below l} |j with bit l cleared>`.
pub fn annihilation_matrix(site: usize, num_qubits: usize) -> Result<CMatrix> {
    check_index(site, num_qubits)?;
    dense_guard(num_qubits, "fermionic operator matrices")?;
    let dim = 1usize << num_qubits;
    let bit = 1usize << site;
    let below = bit - 1;
    let mut m = dense::zeros(dim);
    for j in (0..dim).filter(|j| j & bit != 0) {
        let sign = if (j & below).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        m[(j ^ bit, j)] = Complex64::new(sign, 0.0);
    }
    Ok(m)
}

pub fn creation_matrix(site: usize, num_qubits: usize) -> Result<CMatrix> {
    Ok(annihilation_matrix(site, num_qubits)?.adjoint())
}

/// Chain Hamiltonian assembled directly from fermionic ladder matrices.
/// Shares no code with the Pauli construction and serves as its check.
pub fn fock_matrix_oracle(spec: &ChainSpec) -> Result<CMatrix> {
    spec.validate()?;
    let l = spec.sites;
    dense_guard(l, "the Fock-space oracle")?;
    let dim = 1usize << l;
    let c: Vec<CMatrix> = (0..l).map(|i| annihilation_matrix(i, l)).collect::<Result<_>>()?;
    let cd: Vec<CMatrix> = c.iter().map(|m| m.adjoint()).collect();
    let n: Vec<CMatrix> = (0..l).map(|i| &cd[i] * &c[i]).collect();

    let mut h = dense::zeros(dim);
    for i in 0..l.saturating_sub(1) {
        let hop = &cd[i] * &c[i + 1] + &cd[i + 1] * &c[i];
        h += hop * Complex64::new(spec.hopping, 0.0);
        h += (&n[i] * &n[i + 1]) * Complex64::new(spec.interaction, 0.0);
    }
    Ok(h)
}
