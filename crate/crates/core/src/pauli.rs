//! Pauli strings and real-weighted sums of them.
//!
//! Qubit `q` of a string is letter `q`; on amplitudes it is bit `q` of the
//! basis index. A string acts on a basis state as
//! `P|j> = i^{#Y} (-1)^{popcount(j & zmask)} |j ^ xmask>`, where `xmask`
//! marks X/Y positions and `zmask` marks Z/Y positions (`Y = iXZ`).

use std::fmt;

use num_complex::Complex64;

use crate::dense;
use crate::error::{Error, Result};
use crate::CMatrix;

/// Largest register that may be materialized as a dense matrix.
pub const DENSE_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Bit masks describing how a Pauli string acts on basis indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliMasks {
    pub x: usize,
    pub z: usize,
    pub y_count: u32,
}

impl PauliMasks {
    /// `i^{#Y}`.
    pub fn y_phase(&self) -> Complex64 {
        match self.y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Phase picked up by basis state `j`: `P|j> = phase(j) |j ^ x>`.
    #[inline]
    pub fn phase(&self, j: usize) -> Complex64 {
        let p = self.y_phase();
        if (j & self.z).count_ones() % 2 == 1 {
            -p
        } else {
            p
        }
    }
}

/// A real coefficient times a Pauli string.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    coeff: f64,
    letters: Vec<Pauli>,
}

impl PauliTerm {
    pub fn new(coeff: f64, letters: Vec<Pauli>) -> Result<Self> {
        if !coeff.is_finite() {
            return Err(Error::NonFinite(coeff));
        }
        Ok(PauliTerm { coeff, letters })
    }

    pub fn identity(coeff: f64, num_qubits: usize) -> Result<Self> {
        Self::new(coeff, vec![Pauli::I; num_qubits])
    }

    /// Single-letter string `letter` on qubit `q`, identity elsewhere.
    pub fn single(coeff: f64, letter: Pauli, q: usize, num_qubits: usize) -> Result<Self> {
        crate::error::check_index(q, num_qubits)?;
        let mut letters = vec![Pauli::I; num_qubits];
        letters[q] = letter;
        Self::new(coeff, letters)
    }

    /// Parses a letter string such as `"XZI"`; character `k` acts on qubit `k`.
    pub fn parse(coeff: f64, letters: &str) -> Result<Self> {
        let letters = letters
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidChain(format!("bad Pauli letter {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeff, letters)
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn masks(&self) -> PauliMasks {
        let mut m = PauliMasks { x: 0, z: 0, y_count: 0 };
        for (q, p) in self.letters.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => m.x |= 1 << q,
                Pauli::Z => m.z |= 1 << q,
                Pauli::Y => {
                    m.x |= 1 << q;
                    m.z |= 1 << q;
                    m.y_count += 1;
                }
            }
        }
        m
    }

    /// The letter string alone, qubit 0 first.
    pub fn label(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*{}", self.coeff, self.label())
    }
}

/// A Hermitian operator written as a sum of Pauli strings with real
/// coefficients. Strings are unique; adding an existing string merges the
/// coefficient into the first occurrence so term order is stable.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliHamiltonian {
    num_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    pub fn new(num_qubits: usize) -> Self {
        PauliHamiltonian {
            num_qubits,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(num_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        let mut h = Self::new(num_qubits);
        for t in terms {
            h.add_term(t)?;
        }
        Ok(h)
    }

    pub fn add_term(&mut self, term: PauliTerm) -> Result<()> {
        if term.num_qubits() != self.num_qubits {
            return Err(Error::LengthMismatch {
                expected: self.num_qubits,
                got: term.num_qubits(),
            });
        }
        match self.terms.iter_mut().find(|t| t.letters == term.letters) {
            Some(existing) => existing.coeff += term.coeff,
            None => self.terms.push(term),
        }
        Ok(())
    }

    /// Drops terms whose coefficient is exactly zero.
    pub fn prune_zeros(&mut self) {
        self.terms.retain(|t| t.coeff != 0.0);
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the all-identity string (zero if absent).
    pub fn identity_coefficient(&self) -> f64 {
        self.terms.iter().filter(|t| t.is_identity()).map(|t| t.coeff).sum()
    }

    /// Dense `2^L x 2^L` matrix in the basis where qubit `q` is bit `q`.
    pub fn to_dense(&self) -> Result<CMatrix> {
        if self.num_qubits > DENSE_LIMIT {
            return Err(Error::TooLarge {
                size: self.num_qubits,
                limit: DENSE_LIMIT,
                what: "dense Hamiltonian matrices",
            });
        }
        let dim = 1usize << self.num_qubits;
        let mut m = dense::zeros(dim);
        for term in &self.terms {
            let masks = term.masks();
            for j in 0..dim {
                m[(j ^ masks.x, j)] += masks.phase(j) * term.coeff;
            }
        }
        Ok(m)
    }
}
