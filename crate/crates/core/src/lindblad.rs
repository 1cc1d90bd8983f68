//! Dense density-matrix integrator for
//!
//! `d rho/dt = -i[H, rho] + sum_a (L_a rho L_a^+ - 1/2 {L_a^+ L_a, rho})`.
//!
//! Each contact on site `l` with rates `r_in = Gamma f` and
//! `r_out = Gamma (1 - f)` contributes `sqrt(r_in) c+_l` and `sqrt(r_out) c_l`.
//! The measure-and-reset unraveling also produces the dephasing channels
//! `sqrt(r_in) n_l` and `sqrt(r_out) (1 - n_l)`, included on request.
//! Dissipators of several contacts add.

use num_complex::Complex64;

use crate::dense::{self, commutator};
use crate::error::{check_index, Error, Result};
use crate::fermion_model::annihilation_matrix;
use crate::open_system::ContactSpec;
use crate::statevector::StateVector;
use crate::CMatrix;

/// Largest register the density-matrix oracle accepts.
pub const ORACLE_LIMIT: usize = 8;

/// Eigenvalues below this flag a loss of positivity.
pub const POSITIVITY_FLOOR: f64 = -1e-7;

fn oracle_guard(num_qubits: usize) -> Result<()> {
    if num_qubits > ORACLE_LIMIT {
        return Err(Error::TooLarge {
            size: num_qubits,
            limit: ORACLE_LIMIT,
            what: "the Lindblad oracle",
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    rho: CMatrix,
}

impl DensityMatrix {
    pub fn from_matrix(num_qubits: usize, rho: CMatrix) -> Result<Self> {
        oracle_guard(num_qubits)?;
        let dim = 1usize << num_qubits;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::InvalidState(format!(
                "density matrix must be {dim}x{dim}, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(DensityMatrix { num_qubits, rho })
    }

    /// `|psi><psi|`.
    pub fn from_pure(state: &StateVector) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Self::from_matrix(state.num_qubits(), &v * v.adjoint())
    }

    pub fn basis(num_qubits: usize, occupied: &[usize]) -> Result<Self> {
        Self::from_pure(&StateVector::basis(num_qubits, occupied)?)
    }

    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        Self::from_matrix(
            num_qubits,
            CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
        )
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        dense::trace(&self.rho)
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        dense::trace(&(&self.rho * &self.rho)).re
    }

    pub fn hermiticity_error(&self) -> f64 {
        dense::hermiticity_error(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        dense::hermitian_eigen(&self.rho).0[0]
    }

    /// `tr(rho n_q)`: the summed diagonal weight of basis states with bit `q` set.
    pub fn site_density(&self, q: usize) -> Result<f64> {
        check_index(q, self.num_qubits)?;
        let n: f64 = (0..self.rho.nrows())
            .filter(|j| j >> q & 1 == 1)
            .map(|j| self.rho[(j, j)].re)
            .sum();
        Ok(n.clamp(-1e-9, 1.0 + 1e-9))
    }

    pub fn densities(&self) -> Vec<f64> {
        (0..self.num_qubits)
            .map(|q| self.site_density(q).unwrap_or(0.0))
            .collect()
    }
}

/// `tr(rho n_q)`.
pub fn site_density(rho: &DensityMatrix, q: usize) -> Result<f64> {
    rho.site_density(q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpOperator {
    pub label: String,
    pub op: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpOperatorSet {
    num_qubits: usize,
    ops: Vec<JumpOperator>,
}

impl JumpOperatorSet {
    pub fn empty(num_qubits: usize) -> Self {
        JumpOperatorSet {
            num_qubits,
            ops: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn operators(&self) -> &[JumpOperator] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Jump operators for every contact, in contact order: `L0 = sqrt(r_in) c+`,
/// `L1 = sqrt(r_out) c`, then (with `include_dephasing`) `L2 = sqrt(r_in) n`
/// and `L3 = sqrt(r_out) (c c+)`.
pub fn build_jump_operators(
    contacts: &[ContactSpec],
    num_qubits: usize,
    include_dephasing: bool,
) -> Result<JumpOperatorSet> {
    oracle_guard(num_qubits)?;
    let mut ops = Vec::new();
    for c in contacts {
        c.validate()?;
        let l = c.qubit;
        let a = annihilation_matrix(l, num_qubits)?;
        let ad = a.adjoint();
        let r_in = Complex64::new((c.coupling * c.occupation).sqrt(), 0.0);
        let r_out = Complex64::new((c.coupling * (1.0 - c.occupation)).sqrt(), 0.0);
        let tag = |k: usize| format!("{}:L{k}@{l}", c.label);
        ops.push(JumpOperator {
            label: tag(0),
            op: &ad * r_in,
        });
        ops.push(JumpOperator {
            label: tag(1),
            op: &a * r_out,
        });
        if include_dephasing {
            ops.push(JumpOperator {
                label: tag(2),
                op: (&ad * &a) * r_in,
            });
            ops.push(JumpOperator {
                label: tag(3),
                op: (&a * &ad) * r_out,
            });
        }
    }
    Ok(JumpOperatorSet { num_qubits, ops })
}

/// Right-hand side of the master equation.
pub fn lindblad_rhs(rho: &CMatrix, h: &CMatrix, jumps: &JumpOperatorSet) -> CMatrix {
    let mut out = commutator(h, rho) * Complex64::new(0.0, -1.0);
    for j in &jumps.ops {
        let l = &j.op;
        let ld = l.adjoint();
        let ldl = &ld * l;
        out += l * rho * &ld;
        out -= (&ldl * rho + rho * &ldl) * Complex64::new(0.5, 0.0);
    }
    out
}

/// Master-equation generator with the `L^+ L` products precomputed.
pub struct Generator {
    h_eff: CMatrix,
    h_eff_adj: CMatrix,
    jumps: Vec<(CMatrix, CMatrix)>,
}

impl Generator {
    pub fn new(h: &CMatrix, jumps: &JumpOperatorSet) -> Self {
        // -i[H, rho] - 1/2{K, rho} = -i (H_eff rho - rho H_eff^+), H_eff = H - i K / 2
        let mut k = dense::zeros(h.nrows());
        let jumps: Vec<(CMatrix, CMatrix)> = jumps
            .ops
            .iter()
            .map(|j| {
                let ld = j.op.adjoint();
                k += &ld * &j.op;
                (j.op.clone(), ld)
            })
            .collect();
        let h_eff = h - k * Complex64::new(0.0, 0.5);
        let h_eff_adj = h_eff.adjoint();
        Generator {
            h_eff,
            h_eff_adj,
            jumps,
        }
    }

    pub fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let mut out = (&self.h_eff * rho - rho * &self.h_eff_adj) * Complex64::new(0.0, -1.0);
        for (l, ld) in &self.jumps {
            out += l * rho * ld;
        }
        out
    }
}

/// Fixed-step time grid: `steps` RK4 steps over `t_final`, recording every
/// `record_every` steps (including `t = 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationGrid {
    pub t_final: f64,
    pub steps: usize,
    pub record_every: usize,
}

impl IntegrationGrid {
    /// Grid that records at the same times as a trajectory run with `n_t`
    /// steps recorded every `record_every`, using `substeps` RK4 steps per
    /// trajectory step.
    pub fn aligned(t_final: f64, n_t: usize, record_every: usize, substeps: usize) -> Self {
        IntegrationGrid {
            t_final,
            steps: n_t * substeps,
            record_every: record_every * substeps,
        }
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }
}

/// Worst-case diagnostics over an integration.
#[derive(Clone, Copy, Debug, PartialEq, Default, serde::Serialize)]
pub struct OracleHealth {
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRun {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub health: OracleHealth,
}

impl OracleRun {
    /// `densities[k][q]` at each recorded time.
    pub fn densities(&self) -> Vec<Vec<f64>> {
        self.states.iter().map(|s| s.densities()).collect()
    }
}

/// Number of RK4 substeps per interval of length `interval` that keeps
/// `|rhs| dt` well inside the stability bound for any state, using
/// `|rhs(rho)|_F <= (2|H|_F + 2 sum |L|_F^2) |rho|_F` and `|rho|_F <= 1`.
pub fn stable_substeps(h: &CMatrix, jumps: &JumpOperatorSet, interval: f64, min: usize) -> usize {
    let bound = 2.0 * h.norm() + 2.0 * jumps.ops.iter().map(|j| j.op.norm_squared()).sum::<f64>();
    let needed = (bound * interval / 0.05).ceil() as usize;
    needed.max(min).max(1)
}

/// Integrates with classical RK4. Hermiticity is restored after every step by
/// `rho <- (rho + rho^+)/2`; trace drift, Hermiticity error (before the
/// restore) and the smallest eigenvalue at recording points are tracked.
pub fn integrate(
    rho0: &DensityMatrix,
    h: &CMatrix,
    jumps: &JumpOperatorSet,
    grid: IntegrationGrid,
) -> Result<OracleRun> {
    let n = rho0.num_qubits;
    if jumps.num_qubits != n || h.nrows() != 1 << n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: jumps.num_qubits,
        });
    }
    if grid.steps == 0 || grid.record_every == 0 || !(grid.t_final.is_finite() && grid.t_final > 0.0) {
        return Err(Error::InvalidRun(format!("bad integration grid {grid:?}")));
    }
    let gen = Generator::new(h, jumps);
    let dt = grid.dt();
    let c = Complex64::new;
    let stiffness = gen.rhs(&rho0.rho).norm() * dt;
    if stiffness >= 0.1 {
        return Err(Error::Unstable(stiffness));
    }

    let trace0 = rho0.trace().re;
    let mut health = OracleHealth {
        max_trace_drift: (trace0 - 1.0).abs(),
        max_hermiticity_error: rho0.hermiticity_error(),
        min_eigenvalue: rho0.min_eigenvalue(),
    };
    let mut rho = rho0.rho.clone();
    let mut times = vec![0.0];
    let mut states = vec![rho0.clone()];

    for step in 1..=grid.steps {
        let k1 = gen.rhs(&rho);
        let k2 = gen.rhs(&(&rho + &k1 * c(dt / 2.0, 0.0)));
        let k3 = gen.rhs(&(&rho + &k2 * c(dt / 2.0, 0.0)));
        let k4 = gen.rhs(&(&rho + &k3 * c(dt, 0.0)));
        rho += (k1 + (k2 + k3) * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);

        health.max_hermiticity_error = health.max_hermiticity_error.max(dense::hermiticity_error(&rho));
        rho = dense::hermitian_part(&rho);
        health.max_trace_drift = health.max_trace_drift.max((dense::trace(&rho).re - trace0).abs());

        if step % grid.record_every == 0 {
            let t = step as f64 * dt;
            let state = DensityMatrix {
                num_qubits: n,
                rho: rho.clone(),
            };
            let min_eig = state.min_eigenvalue();
            health.min_eigenvalue = health.min_eigenvalue.min(min_eig);
            if min_eig < POSITIVITY_FLOOR {
                return Err(Error::PositivityViolated {
                    time: t,
                    eigenvalue: min_eig,
                });
            }
            times.push(t);
            states.push(state);
        }
    }
    Ok(OracleRun { times, states, health })
}

/// `(1/N) sum_k |psi_k><psi_k|`.
pub fn trajectory_average_dm(states: &[StateVector]) -> Result<DensityMatrix> {
    let first = states
        .first()
        .ok_or_else(|| Error::InvalidState("no states to average".into()))?;
    let n = first.num_qubits();
    oracle_guard(n)?;
    let dim = 1usize << n;
    let mut acc = dense::zeros(dim);
    for s in states {
        if s.num_qubits() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: s.num_qubits(),
            });
        }
        let a = s.amplitudes();
        for r in 0..dim {
            if a[r] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for col in 0..dim {
                acc[(r, col)] += a[r] * a[col].conj();
            }
        }
    }
    DensityMatrix::from_matrix(n, acc / Complex64::new(states.len() as f64, 0.0))
}
