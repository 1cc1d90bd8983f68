//! Open-system trajectories: after every Trotter step each contact draws one
//! uniform number and either injects a particle (reset its qubit to `|1>`),
//! removes one (reset to `|0>`), or does nothing. With `eta = Gamma * dt`
//! the branch probabilities are `eta * f`, `eta * (1 - f)` and `1 - eta`.

use std::fmt;

use crate::error::{check_index, Error, Result};
use crate::exec::Execution;
use crate::statevector::{ResetEvent, RngStream, StateVector};
use crate::trotter::TrotterPlan;

/// A conductor attached to one qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactSpec {
    pub qubit: usize,
    /// Coupling rate `Gamma` in meV.
    pub coupling: f64,
    /// Contact occupation `f(mu)` in `[0, 1]`.
    pub occupation: f64,
    pub label: String,
}

impl ContactSpec {
    pub fn new(qubit: usize, coupling: f64, occupation: f64, label: impl Into<String>) -> Result<Self> {
        let c = ContactSpec {
            qubit,
            coupling,
            occupation,
            label: label.into(),
        };
        c.validate()?;
        Ok(c)
    }

    /// Always-full contact (`f = 1`).
    pub fn source(qubit: usize, coupling: f64) -> Result<Self> {
        Self::new(qubit, coupling, 1.0, "S")
    }

    /// Always-empty contact (`f = 0`).
    pub fn drain(qubit: usize, coupling: f64) -> Result<Self> {
        Self::new(qubit, coupling, 0.0, "D")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(Error::InvalidContact(format!(
                "coupling rate must be finite and non-negative, got {}",
                self.coupling
            )));
        }
        if !(0.0..=1.0).contains(&self.occupation) {
            return Err(Error::InvalidContact(format!(
                "occupation must lie in [0, 1], got {}",
                self.occupation
            )));
        }
        Ok(())
    }

    /// Per-step action probability `Gamma * dt`.
    pub fn eta(&self, dt: f64) -> f64 {
        self.coupling * dt
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepProbabilities {
    pub inject: f64,
    pub remove: f64,
    pub idle: f64,
}

/// Branch probabilities of one contact for one step. `idle` is the exact
/// remainder, so `(inject + remove) + idle == 1.0`.
pub fn step_probabilities(c: &ContactSpec, dt: f64) -> Result<StepProbabilities> {
    c.validate()?;
    let eta = c.eta(dt);
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidContact(format!("eta exceeds 1 (eta = {eta})")));
    }
    let inject = eta * c.occupation;
    let remove = eta * (1.0 - c.occupation);
    Ok(StepProbabilities {
        inject,
        remove,
        idle: 1.0 - (inject + remove),
    })
}

/// Fermi-Dirac occupation `1 / (exp((eps - mu) / kT) + 1)`; a step function
/// at `kT = 0` with value 1/2 at `eps = mu`.
pub fn fermi_dirac(eps: f64, mu: f64, kt: f64) -> f64 {
    let de = eps - mu;
    if de == 0.0 {
        return 0.5;
    }
    if kt <= 0.0 {
        return if de < 0.0 { 1.0 } else { 0.0 };
    }
    let x = de / kt;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    /// Total time in hbar/meV.
    pub t_final: f64,
    /// Number of Trotter steps.
    pub steps: usize,
    pub trajectories: usize,
    pub seed: u64,
    /// Steps between density recordings.
    pub record_every: usize,
}

impl RunConfig {
    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::InvalidRun(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidRun("N_t must be at least 1".into()));
        }
        if self.trajectories == 0 {
            return Err(Error::InvalidRun("N_traj must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidRun("record_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Steps at which densities are recorded, starting with 0.
    pub fn recording_steps(&self) -> Vec<usize> {
        (0..=self.steps / self.record_every)
            .map(|k| k * self.record_every)
            .collect()
    }

    /// Checks the per-contact and per-qubit `eta <= 1` bounds.
    pub fn validate_contacts(&self, contacts: &[ContactSpec], num_qubits: usize) -> Result<()> {
        let dt = self.dt();
        let mut per_qubit = vec![0.0; num_qubits];
        for c in contacts {
            check_index(c.qubit, num_qubits)?;
            step_probabilities(c, dt)?;
            per_qubit[c.qubit] += c.eta(dt);
        }
        if let Some((q, total)) = per_qubit.iter().enumerate().find(|(_, &e)| e > 1.0) {
            return Err(Error::InvalidContact(format!(
                "eta exceeds 1 on qubit {q} summed over its contacts (eta = {total})"
            )));
        }
        Ok(())
    }
}

/// What a contact did in one step. The `Null*` variants are attempts where the
/// measurement already matched the target so nothing was flipped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContactAction {
    Inject,
    Remove,
    NullInject,
    NullRemove,
}

impl ContactAction {
    pub fn from_reset(ev: &ResetEvent) -> Self {
        match (ev.target, ev.changed()) {
            (true, true) => ContactAction::Inject,
            (true, false) => ContactAction::NullInject,
            (false, true) => ContactAction::Remove,
            (false, false) => ContactAction::NullRemove,
        }
    }

    /// Whether the occupation changed.
    pub fn is_effective(self) -> bool {
        matches!(self, ContactAction::Inject | ContactAction::Remove)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ContactAction::Inject => "inject",
            ContactAction::Remove => "remove",
            ContactAction::NullInject => "null_inject",
            ContactAction::NullRemove => "null_remove",
        }
    }
}

impl fmt::Display for ContactAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrajectoryEvent {
    pub trajectory: u64,
    /// 1-based index of the step during which the reset happened.
    pub step: usize,
    pub qubit: usize,
    pub action: ContactAction,
    pub reset: ResetEvent,
}

/// Densities and contact events of one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityRecord {
    pub trajectory: u64,
    pub steps: Vec<usize>,
    /// `densities[k][q]` is `<n_q>` at `steps[k]`.
    pub densities: Vec<Vec<f64>>,
    pub events: Vec<TrajectoryEvent>,
}

/// One trajectory that can be advanced step by step.
pub struct Trajectory<'a> {
    plan: &'a TrotterPlan,
    contacts: Vec<(usize, StepProbabilities)>,
    state: StateVector,
    rng: RngStream,
    step: usize,
    id: u64,
}

fn check_run(plan: &TrotterPlan, contacts: &[ContactSpec], cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let dt = cfg.dt();
    if (plan.dt() - dt).abs() > 1e-12 * dt {
        return Err(Error::InvalidRun(format!(
            "plan time step {} does not match t_final / N_t = {dt}",
            plan.dt()
        )));
    }
    cfg.validate_contacts(contacts, plan.num_qubits())
}

impl<'a> Trajectory<'a> {
    pub fn new(
        plan: &'a TrotterPlan,
        contacts: &[ContactSpec],
        cfg: &RunConfig,
        init: &[usize],
        id: u64,
    ) -> Result<Self> {
        check_run(plan, contacts, cfg)?;
        let dt = cfg.dt();
        let contacts = contacts
            .iter()
            .map(|c| Ok((c.qubit, step_probabilities(c, dt)?)))
            .collect::<Result<_>>()?;
        Ok(Trajectory {
            plan,
            contacts,
            state: StateVector::basis(plan.num_qubits(), init)?,
            rng: RngStream::for_trajectory(cfg.seed, id),
            step: 0,
            id,
        })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// One Trotter step followed by one draw per contact, in contact order.
    pub fn advance(&mut self, events: &mut Vec<TrajectoryEvent>) -> Result<()> {
        self.plan.apply(&mut self.state)?;
        self.step += 1;
        for &(q, p) in &self.contacts {
            let draw = self.rng.uniform();
            let target = if draw < p.inject {
                true
            } else if draw < p.inject + p.remove {
                false
            } else {
                continue;
            };
            let reset = self.state.reset_to(q, target, &mut self.rng)?;
            events.push(TrajectoryEvent {
                trajectory: self.id,
                step: self.step,
                qubit: q,
                action: ContactAction::from_reset(&reset),
                reset,
            });
        }
        Ok(())
    }
}

/// Runs one trajectory for `cfg.steps` steps, seeded from `(cfg.seed, id)`.
pub fn run_trajectory(
    plan: &TrotterPlan,
    contacts: &[ContactSpec],
    cfg: &RunConfig,
    init: &[usize],
    id: u64,
) -> Result<DensityRecord> {
    let mut traj = Trajectory::new(plan, contacts, cfg, init, id)?;
    let steps = cfg.recording_steps();
    let mut densities = Vec::with_capacity(steps.len());
    let mut events = Vec::new();
    densities.push(traj.state().densities());
    for _ in 0..cfg.steps {
        traj.advance(&mut events)?;
        if traj.step() % cfg.record_every == 0 {
            densities.push(traj.state().densities());
        }
    }
    Ok(DensityRecord {
        trajectory: id,
        steps,
        densities,
        events,
    })
}

/// Ensemble-averaged densities with per-point standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub steps: Vec<usize>,
    /// `mean_density[k][q]`.
    pub mean_density: Vec<Vec<f64>>,
    /// Standard error of the mean; zero for a single trajectory.
    pub stderr: Vec<Vec<f64>>,
    pub events: Vec<TrajectoryEvent>,
    pub trajectories: usize,
}

impl EnsembleResult {
    pub fn num_sites(&self) -> usize {
        self.mean_density.first().map_or(0, |r| r.len())
    }

    /// Builds a result from records, reducing them in the given order.
    pub fn from_records(records: &[DensityRecord], dt: f64) -> Self {
        let first = &records[0];
        let rows = first.densities.len();
        let sites = first.densities[0].len();
        let n = records.len() as f64;

        let mut mean = vec![vec![0.0; sites]; rows];
        for r in records {
            for (m, d) in mean.iter_mut().zip(&r.densities) {
                for (a, b) in m.iter_mut().zip(d) {
                    *a += b;
                }
            }
        }
        for row in &mut mean {
            for v in row.iter_mut() {
                *v /= n;
            }
        }

        let mut stderr = vec![vec![0.0; sites]; rows];
        if records.len() > 1 {
            for r in records {
                for ((s, m), d) in stderr.iter_mut().zip(&mean).zip(&r.densities) {
                    for ((a, mu), x) in s.iter_mut().zip(m).zip(d) {
                        *a += (x - mu) * (x - mu);
                    }
                }
            }
            for row in &mut stderr {
                for v in row.iter_mut() {
                    *v = (*v / (n - 1.0) / n).sqrt();
                }
            }
        }
        for row in &mut mean {
            for v in row.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
        }

        EnsembleResult {
            times: first.steps.iter().map(|&s| s as f64 * dt).collect(),
            steps: first.steps.clone(),
            mean_density: mean,
            stderr,
            events: records.iter().flat_map(|r| r.events.iter().copied()).collect(),
            trajectories: records.len(),
        }
    }
}

/// Runs `cfg.trajectories` trajectories with ids `0..N_traj` on the default
/// executor.
pub fn run_ensemble(
    plan: &TrotterPlan,
    contacts: &[ContactSpec],
    cfg: &RunConfig,
    init: &[usize],
) -> Result<EnsembleResult> {
    run_ensemble_with(plan, contacts, cfg, init, Execution::default())
}

/// As [`run_ensemble`] with an explicit executor. The reduction runs in
/// trajectory-id order, so the result does not depend on `exec`.
pub fn run_ensemble_with(
    plan: &TrotterPlan,
    contacts: &[ContactSpec],
    cfg: &RunConfig,
    init: &[usize],
    exec: Execution,
) -> Result<EnsembleResult> {
    check_run(plan, contacts, cfg)?;
    StateVector::basis(plan.num_qubits(), init)?;
    let records = exec
        .map_indexed(cfg.trajectories, |i| {
            run_trajectory(plan, contacts, cfg, init, i as u64)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleResult::from_records(&records, cfg.dt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion_model::{build_chain_hamiltonian, ChainSpec};
    use crate::pauli::PauliHamiltonian;
    use crate::trotter::build_step;
    use proptest::prelude::*;

    fn cfg(t_final: f64, steps: usize, trajectories: usize, seed: u64) -> RunConfig {
        RunConfig {
            t_final,
            steps,
            trajectories,
            seed,
            record_every: 1,
        }
    }

    #[test]
    fn probabilities_examples() {
        let p = step_probabilities(&ContactSpec::source(0, 0.5).unwrap(), 0.5).unwrap();
        assert_eq!((p.inject, p.remove, p.idle), (0.25, 0.0, 0.75));
        let p = step_probabilities(&ContactSpec::new(0, 0.0, 0.3, "X").unwrap(), 0.5).unwrap();
        assert_eq!((p.inject, p.remove, p.idle), (0.0, 0.0, 1.0));
        let p = step_probabilities(&ContactSpec::new(0, 0.4, 0.5, "X").unwrap(), 0.5).unwrap();
        assert_eq!((p.inject, p.remove, p.idle), (0.1, 0.1, 0.8));
        assert!(step_probabilities(&ContactSpec::source(0, 3.0).unwrap(), 0.5).is_err());
    }

    #[test]
    fn contact_validation() {
        assert!(ContactSpec::new(0, -0.1, 0.5, "S").is_err());
        assert!(ContactSpec::new(0, 0.1, 1.5, "S").is_err());
        assert!(ContactSpec::new(0, f64::NAN, 0.5, "S").is_err());
        let run = cfg(1.0, 2, 1, 0);
        // two contacts on the same qubit, each fine alone, too much together
        let contacts = [
            ContactSpec::source(0, 1.2).unwrap(),
            ContactSpec::drain(0, 1.2).unwrap(),
        ];
        assert!(run.validate_contacts(&contacts[..1], 2).is_ok());
        assert!(run.validate_contacts(&contacts, 2).is_err());
        assert!(run
            .validate_contacts(&[ContactSpec::source(2, 0.1).unwrap()], 2)
            .is_err());
    }

    #[test]
    fn fermi_dirac_examples() {
        assert_eq!(fermi_dirac(1.0, 1.0, 0.3), 0.5);
        assert_eq!(fermi_dirac(1.0, 1.0, 0.0), 0.5);
        assert_eq!(fermi_dirac(0.0, 1.0, 0.0), 1.0);
        assert_eq!(fermi_dirac(2.0, 1.0, 0.0), 0.0);
        let expected = 1.0 / (std::f64::consts::E + 1.0);
        assert!((fermi_dirac(1.5, 1.0, 0.5) - expected).abs() < 1e-15);
        assert!((fermi_dirac(1.5, 1.0, 0.5) - 0.26894).abs() < 1e-5);
        assert_eq!(fermi_dirac(1e6, 0.0, 1e-3), 0.0);
        assert_eq!(fermi_dirac(-1e6, 0.0, 1e-3), 1.0);
    }

    #[test]
    fn recording_grid() {
        let c = RunConfig {
            t_final: 10.0,
            steps: 20,
            trajectories: 1,
            seed: 0,
            record_every: 3,
        };
        assert_eq!(c.recording_steps(), vec![0, 3, 6, 9, 12, 15, 18]);
        assert_eq!(c.recording_steps().len(), 20 / 3 + 1);
    }

    #[test]
    fn no_contacts_matches_closed_evolution() {
        let h = build_chain_hamiltonian(&ChainSpec::new(4, 3.0, 10.0).unwrap()).unwrap();
        let run = cfg(2.0, 8, 1, 42);
        let plan = build_step(&h, run.dt()).unwrap();
        let rec = run_trajectory(&plan, &[], &run, &[0], 0).unwrap();
        let mut s = StateVector::basis(4, &[0]).unwrap();
        for k in 1..=8 {
            plan.apply(&mut s).unwrap();
            assert_eq!(rec.densities[k], s.densities());
        }
        assert!(rec.events.is_empty());
    }

    #[test]
    fn zero_coupling_reproduces_closed_system() {
        let h = build_chain_hamiltonian(&ChainSpec::new(3, 1.0, 2.0).unwrap()).unwrap();
        let run = cfg(3.0, 12, 4, 1);
        let plan = build_step(&h, run.dt()).unwrap();
        let closed = run_ensemble(&plan, &[], &run, &[0]).unwrap();
        let contacts = [
            ContactSpec::source(0, 0.0).unwrap(),
            ContactSpec::drain(2, 0.0).unwrap(),
        ];
        let open = run_ensemble(&plan, &contacts, &run, &[0]).unwrap();
        for (a, b) in closed.mean_density.iter().zip(&open.mean_density) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
        assert!(open.stderr.iter().flatten().all(|&s| s == 0.0));
    }

    #[test]
    fn empty_hamiltonian_source_is_absorbing() {
        let plan = build_step(&PauliHamiltonian::new(1), 0.5).unwrap();
        let run = cfg(10.0, 20, 1, 9);
        let contacts = [ContactSpec::source(0, 0.5).unwrap()];
        for id in 0..20 {
            let rec = run_trajectory(&plan, &contacts, &run, &[], id).unwrap();
            let n: Vec<f64> = rec.densities.iter().map(|d| d[0]).collect();
            assert!(n.iter().all(|&x| x == 0.0 || x == 1.0));
            assert!(n.windows(2).all(|w| w[0] <= w[1]));
            // the first inject event is the only effective one
            let effective: Vec<_> = rec.events.iter().filter(|e| e.action.is_effective()).collect();
            assert!(effective.len() <= 1);
            if let Some(e) = effective.first() {
                assert_eq!(e.action, ContactAction::Inject);
                assert_eq!(n[e.step - 1], 0.0);
                assert_eq!(n[e.step], 1.0);
            }
        }
    }

    #[test]
    fn same_seed_same_record() {
        let h = build_chain_hamiltonian(&ChainSpec::new(3, 3.0, 10.0).unwrap()).unwrap();
        let run = cfg(5.0, 20, 1, 77);
        let plan = build_step(&h, run.dt()).unwrap();
        let contacts = [
            ContactSpec::source(0, 0.5).unwrap(),
            ContactSpec::drain(2, 0.5).unwrap(),
        ];
        let a = run_trajectory(&plan, &contacts, &run, &[0], 3).unwrap();
        let b = run_trajectory(&plan, &contacts, &run, &[0], 3).unwrap();
        assert_eq!(a, b);
        let c = run_trajectory(&plan, &contacts, &run, &[0], 4).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn single_trajectory_ensemble() {
        let h = build_chain_hamiltonian(&ChainSpec::new(2, 1.0, 0.0).unwrap()).unwrap();
        let run = cfg(2.0, 4, 1, 5);
        let plan = build_step(&h, run.dt()).unwrap();
        let contacts = [ContactSpec::source(0, 0.5).unwrap()];
        let ens = run_ensemble(&plan, &contacts, &run, &[]).unwrap();
        let rec = run_trajectory(&plan, &contacts, &run, &[], 0).unwrap();
        assert_eq!(ens.mean_density, rec.densities);
        assert!(ens.stderr.iter().flatten().all(|&s| s == 0.0));
        assert_eq!(ens.times, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn mismatched_plan_is_rejected() {
        let plan = build_step(&PauliHamiltonian::new(1), 0.3).unwrap();
        assert!(run_trajectory(&plan, &[], &cfg(1.0, 2, 1, 0), &[], 0).is_err());
        let plan = build_step(&PauliHamiltonian::new(1), 0.5).unwrap();
        assert!(run_trajectory(&plan, &[], &cfg(1.0, 2, 1, 0), &[1], 0).is_err());
    }

    #[test]
    fn events_pin_densities() {
        let h = build_chain_hamiltonian(&ChainSpec::new(3, 3.0, 10.0).unwrap()).unwrap();
        let run = cfg(10.0, 40, 1, 31);
        let plan = build_step(&h, run.dt()).unwrap();
        let contacts = [
            ContactSpec::source(0, 0.5).unwrap(),
            ContactSpec::drain(2, 0.5).unwrap(),
        ];
        for id in 0..50 {
            let rec = run_trajectory(&plan, &contacts, &run, &[0], id).unwrap();
            for e in &rec.events {
                // recording happens after both contacts act; the drain sits on another qubit
                let n = rec.densities[e.step][e.qubit];
                match e.action {
                    ContactAction::Inject | ContactAction::NullInject => assert_eq!(n, 1.0),
                    ContactAction::Remove | ContactAction::NullRemove => assert_eq!(n, 0.0),
                }
            }
        }
    }

    proptest! {
        #[test]
        fn probabilities_partition_exactly(coupling in 0.0f64..4.0, occupation in 0.0f64..=1.0, dt in 1e-4f64..0.25) {
            let c = ContactSpec::new(0, coupling, occupation, "C").unwrap();
            let p = step_probabilities(&c, dt).unwrap();
            prop_assert_eq!(p.inject + p.remove + p.idle, 1.0);
            prop_assert!(p.inject >= 0.0 && p.remove >= 0.0 && p.idle >= 0.0);
        }

        #[test]
        fn fermi_dirac_bounded(eps in -1e3f64..1e3, mu in -1e3f64..1e3, kt in 0.0f64..100.0) {
            let f = fermi_dirac(eps, mu, kt);
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}
