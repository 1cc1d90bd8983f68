//! State-vector register with the primitives the trajectory loop needs:
//! Pauli-string rotations, projective single-qubit measurement, bit flips and
//! measure-then-flip resets.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_index, Error, Result};
use crate::pauli::{PauliHamiltonian, PauliMasks, PauliTerm};

/// Registers above this size are refused; every extra qubit doubles memory.
pub const MAX_QUBITS: usize = 26;

/// Outcome probabilities this close to 0 or 1 are treated as certain and no
/// random number is drawn.
pub const FORCED_OUTCOME_EPS: f64 = 1e-12;

/// Deterministic uniform stream. ChaCha8 with a 64-bit seed; each trajectory
/// uses its own ChaCha stream id, so draws do not depend on scheduling.
#[derive(Clone, Debug)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn for_trajectory(seed: u64, trajectory: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trajectory);
        RngStream(rng)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }
}

/// Record of one measure-and-reset of a qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResetEvent {
    pub qubit: usize,
    /// Measured value, `true` for `|1>`.
    pub measured: bool,
    pub target: bool,
}

impl ResetEvent {
    /// Whether the flip was applied, i.e. the occupation actually changed.
    pub fn changed(&self) -> bool {
        self.measured != self.target
    }
}

/// Neumaier-compensated sum.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.c
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_size(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 {
        return Err(Error::InvalidState("register needs at least one qubit".into()));
    }
    if num_qubits > MAX_QUBITS {
        return Err(Error::TooLarge {
            size: num_qubits,
            limit: MAX_QUBITS,
            what: "state vectors",
        });
    }
    Ok(())
}

impl StateVector {
    /// Computational basis state with exactly the qubits in `occupied` set to `|1>`.
    pub fn basis(num_qubits: usize, occupied: &[usize]) -> Result<Self> {
        check_size(num_qubits)?;
        let mut index = 0usize;
        for &q in occupied {
            check_index(q, num_qubits)?;
            index |= 1 << q;
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    /// Builds a state from raw amplitudes and normalizes it.
    pub fn from_amplitudes(num_qubits: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        check_size(num_qubits)?;
        if amps.len() != 1 << num_qubits {
            return Err(Error::InvalidState(format!(
                "expected {} amplitudes, got {}",
                1usize << num_qubits,
                amps.len()
            )));
        }
        let mut acc = CompensatedSum::default();
        for a in &amps {
            acc.add(a.norm_sqr());
        }
        let norm = acc.value().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("amplitudes have zero or non-finite norm".into()));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for a in &self.amps {
            acc.add(a.norm_sqr());
        }
        acc.value()
    }

    /// Applies `exp(-i * angle * P)` for the unit-weight string `P` of `term`
    /// (the term's coefficient is ignored). Uses `P^2 = I`:
    /// `cos(angle)|psi> - i sin(angle) P|psi>`.
    pub fn apply_pauli_rotation(&mut self, term: &PauliTerm, angle: f64) -> Result<()> {
        if term.num_qubits() != self.num_qubits {
            return Err(Error::LengthMismatch {
                expected: self.num_qubits,
                got: term.num_qubits(),
            });
        }
        self.rotate(term.masks(), angle);
        Ok(())
    }

    /// Rotation kernel. Pairs index `j` with `j ^ x` so each amplitude is read
    /// and written once.
    pub(crate) fn rotate(&mut self, m: PauliMasks, angle: f64) {
        let (s, c) = angle.sin_cos();
        let minus_i_sin = Complex64::new(0.0, -s);
        if m.x == 0 {
            // diagonal: phase e^{-i angle * sign(j)}, with sign = y_phase * (-1)^{..} = +/-1
            let plus = Complex64::new(c, 0.0) + minus_i_sin * m.y_phase();
            let minus = Complex64::new(c, 0.0) - minus_i_sin * m.y_phase();
            for (j, a) in self.amps.iter_mut().enumerate() {
                *a *= if (j & m.z).count_ones().is_multiple_of(2) {
                    plus
                } else {
                    minus
                };
            }
            return;
        }
        let high = 1usize << (usize::BITS - 1 - m.x.leading_zeros());
        for j in 0..self.amps.len() {
            if j & high != 0 {
                continue;
            }
            let k = j ^ m.x;
            let (aj, ak) = (self.amps[j], self.amps[k]);
            // (P psi)_j = phase(k) a_k, (P psi)_k = phase(j) a_j
            self.amps[j] = aj * c + minus_i_sin * m.phase(k) * ak;
            self.amps[k] = ak * c + minus_i_sin * m.phase(j) * aj;
        }
    }

    /// Probability of finding qubit `q` in `|1>`.
    pub fn expectation_number(&self, q: usize) -> Result<f64> {
        check_index(q, self.num_qubits)?;
        let (p0, p1) = self.marginals(q);
        Ok((p1 / (p0 + p1)).clamp(0.0, 1.0))
    }

    /// Occupation of every qubit in one pass. Each value is taken relative to
    /// the total mass, so a qubit with no weight on `|0>` reads exactly 1.
    pub fn densities(&self) -> Vec<f64> {
        let mut acc = vec![CompensatedSum::default(); self.num_qubits];
        let mut total = CompensatedSum::default();
        for (j, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            total.add(p);
            for (q, s) in acc.iter_mut().enumerate() {
                if j >> q & 1 == 1 {
                    s.add(p);
                }
            }
        }
        let total = total.value();
        acc.into_iter().map(|s| (s.value() / total).clamp(0.0, 1.0)).collect()
    }

    /// `<psi|H|psi>` for a Pauli sum.
    pub fn expectation(&self, h: &PauliHamiltonian) -> Result<f64> {
        if h.num_qubits() != self.num_qubits {
            return Err(Error::LengthMismatch {
                expected: self.num_qubits,
                got: h.num_qubits(),
            });
        }
        let mut total = 0.0;
        for term in h.terms() {
            let m = term.masks();
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, a) in self.amps.iter().enumerate() {
                acc += self.amps[j ^ m.x].conj() * m.phase(j) * a;
            }
            total += term.coeff() * acc.re;
        }
        Ok(total)
    }

    /// Unnormalized probability mass with qubit `q` in `|0>` and in `|1>`.
    fn marginals(&self, q: usize) -> (f64, f64) {
        let bit = 1usize << q;
        let (mut zero, mut one) = (CompensatedSum::default(), CompensatedSum::default());
        for (j, a) in self.amps.iter().enumerate() {
            if j & bit == 0 {
                zero.add(a.norm_sqr());
            } else {
                one.add(a.norm_sqr());
            }
        }
        (zero.value(), one.value())
    }

    /// Projective measurement of qubit `q`. Consumes one uniform draw unless
    /// the outcome is certain to within [`FORCED_OUTCOME_EPS`]. The state is
    /// collapsed and renormalized by the surviving probability mass.
    pub fn measure_qubit(&mut self, q: usize, rng: &mut RngStream) -> Result<bool> {
        check_index(q, self.num_qubits)?;
        let (m0, m1) = self.marginals(q);
        let total = m0 + m1;
        let p0 = m0 / total;
        let outcome = if p0 <= FORCED_OUTCOME_EPS {
            true
        } else if p0 >= 1.0 - FORCED_OUTCOME_EPS {
            false
        } else {
            rng.uniform() >= p0
        };
        let keep = if outcome { m1 } else { m0 };
        let scale = 1.0 / keep.sqrt();
        let bit = 1usize << q;
        for (j, a) in self.amps.iter_mut().enumerate() {
            if (j & bit != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(outcome)
    }

    /// Pauli X on qubit `q`.
    pub fn flip_qubit(&mut self, q: usize) -> Result<()> {
        check_index(q, self.num_qubits)?;
        let bit = 1usize << q;
        for j in 0..self.amps.len() {
            if j & bit == 0 {
                self.amps.swap(j, j | bit);
            }
        }
        Ok(())
    }

    /// Measures qubit `q` and flips it if the outcome differs from `target`.
    /// Afterwards qubit `q` is exactly in `|target>`.
    pub fn reset_to(&mut self, q: usize, target: bool, rng: &mut RngStream) -> Result<ResetEvent> {
        let measured = self.measure_qubit(q, rng)?;
        if measured != target {
            self.flip_qubit(q)?;
        }
        Ok(ResetEvent {
            qubit: q,
            measured,
            target,
        })
    }
}
