//! Runs a [`ScenarioConfig`] and writes its output files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Mode, ScenarioConfig};
use super::output::{density_csv, events_csv, fmt_sig, heatmap_svg, write_file};
use super::HarnessError;
use crate::exec::Execution;
use crate::fermion_model::build_chain_hamiltonian;
use crate::lindblad::{
    build_jump_operators, integrate, stable_substeps, DensityMatrix, IntegrationGrid, OracleHealth, OracleRun,
    POSITIVITY_FLOOR,
};
use crate::open_system::{run_ensemble_with, run_trajectory, EnsembleResult};
use crate::trotter::build_step;

/// Allowed statistical deviation, in standard errors.
pub const STDERR_FACTOR: f64 = 3.0;
/// Allowed systematic deviation per point.
pub const BIAS_BUDGET: f64 = 0.05;
/// Oracle health limits.
pub const MAX_TRACE_DRIFT: f64 = 1e-8;
pub const MAX_HERMITICITY_ERROR: f64 = 1e-10;
/// Lower bound on RK4 substeps per trajectory step.
pub const MIN_ORACLE_SUBSTEPS: usize = 20;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub execution: Execution,
    /// Also write `density_single.csv` and `events_single.csv` for trajectory 0.
    pub single: bool,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        RunOptions {
            out_dir: out_dir.into(),
            execution: Execution::default(),
            single: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub files: Vec<PathBuf>,
    pub result: EnsembleResult,
    pub verdict: Option<Verdict>,
}

/// Summary written to `verdict.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub verdict: &'static str,
    pub passed: bool,
    pub sites: usize,
    pub trajectories: usize,
    pub steps: usize,
    pub dt: f64,
    pub seed: u64,
    pub stderr_factor: f64,
    pub bias_budget: f64,
    /// Largest `|n_traj - n_oracle|`.
    pub max_deviation: f64,
    /// Largest `|n_traj - n_oracle| - (3 se + 0.05)`; positive means a miss.
    pub max_excess: f64,
    pub worst_site: usize,
    pub worst_time: f64,
    pub points: usize,
    pub failed_points: usize,
    pub include_depolarizing: bool,
    /// Largest change in oracle densities from the dephasing terms.
    pub depolarizing_effect: f64,
    pub oracle_substeps: usize,
    pub oracle_health: OracleHealth,
    pub oracle_healthy: bool,
}

/// A trajectory ensemble next to the two oracle variants.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub trajectory: EnsembleResult,
    /// Oracle with or without dephasing, as configured.
    pub oracle: OracleRun,
    /// The other variant.
    pub alternate: OracleRun,
    pub verdict: Verdict,
}

/// Integrates the master equation on the trajectory recording grid.
pub fn run_oracle(cfg: &ScenarioConfig, include_dephasing: bool) -> Result<(OracleRun, usize), HarnessError> {
    let l = cfg.chain.sites;
    let h = build_chain_hamiltonian(&cfg.chain)?.to_dense()?;
    let jumps = build_jump_operators(&cfg.contact_specs(), l, include_dephasing)?;
    let substeps = stable_substeps(&h, &jumps, cfg.run.dt(), MIN_ORACLE_SUBSTEPS);
    let grid = IntegrationGrid::aligned(cfg.run.t_final, cfg.run.steps, cfg.run.record_every, substeps);
    let rho0 = DensityMatrix::basis(l, &cfg.init_sites)?;
    Ok((integrate(&rho0, &h, &jumps, grid)?, substeps))
}

pub fn run_trajectories(cfg: &ScenarioConfig, execution: Execution) -> Result<EnsembleResult, HarnessError> {
    let h = build_chain_hamiltonian(&cfg.chain)?;
    let plan = build_step(&h, cfg.run.dt())?;
    let mut run = cfg.run;
    if cfg.mode == Mode::Closed {
        run.trajectories = 1;
    }
    Ok(run_ensemble_with(
        &plan,
        &cfg.contact_specs(),
        &run,
        &cfg.init_sites,
        execution,
    )?)
}

/// Trajectory ensemble against the Lindblad oracle.
pub fn compare(cfg: &ScenarioConfig, execution: Execution) -> Result<Comparison, HarnessError> {
    cfg.validate()?;
    let trajectory = run_trajectories(cfg, execution)?;
    let (oracle, substeps) = run_oracle(cfg, cfg.include_depolarizing)?;
    let (alternate, _) = run_oracle(cfg, !cfg.include_depolarizing)?;

    let oracle_n = oracle.densities();
    let alt_n = alternate.densities();
    let mut max_deviation = 0.0f64;
    let mut max_excess = f64::NEG_INFINITY;
    let (mut worst_site, mut worst_time) = (1, 0.0);
    let mut failed_points = 0;
    let mut points = 0;
    let mut depolarizing_effect = 0.0f64;
    for k in 0..trajectory.times.len() {
        for q in 0..trajectory.num_sites() {
            let diff = (trajectory.mean_density[k][q] - oracle_n[k][q]).abs();
            let excess = diff - (STDERR_FACTOR * trajectory.stderr[k][q] + BIAS_BUDGET);
            points += 1;
            if excess > 0.0 {
                failed_points += 1;
            }
            max_deviation = max_deviation.max(diff);
            if excess > max_excess {
                max_excess = excess;
                worst_site = q + 1;
                worst_time = trajectory.times[k];
            }
            depolarizing_effect = depolarizing_effect.max((oracle_n[k][q] - alt_n[k][q]).abs());
        }
    }
    let health = oracle.health;
    let oracle_healthy = health.max_trace_drift <= MAX_TRACE_DRIFT
        && health.max_hermiticity_error <= MAX_HERMITICITY_ERROR
        && health.min_eigenvalue >= POSITIVITY_FLOOR;
    let passed = failed_points == 0 && oracle_healthy;
    let verdict = Verdict {
        verdict: if passed { "PASS" } else { "FAIL" },
        passed,
        sites: cfg.chain.sites,
        trajectories: trajectory.trajectories,
        steps: cfg.run.steps,
        dt: cfg.run.dt(),
        seed: cfg.run.seed,
        stderr_factor: STDERR_FACTOR,
        bias_budget: BIAS_BUDGET,
        max_deviation,
        max_excess,
        worst_site,
        worst_time,
        points,
        failed_points,
        include_depolarizing: cfg.include_depolarizing,
        depolarizing_effect,
        oracle_substeps: substeps,
        oracle_health: health,
        oracle_healthy,
    };
    Ok(Comparison {
        trajectory,
        oracle,
        alternate,
        verdict,
    })
}

fn oracle_result(run: &OracleRun, cfg: &ScenarioConfig) -> EnsembleResult {
    let n = run.densities();
    EnsembleResult {
        times: run.times.clone(),
        steps: cfg.run.recording_steps(),
        stderr: vec![vec![0.0; cfg.chain.sites]; n.len()],
        mean_density: n,
        events: vec![],
        trajectories: 0,
    }
}

fn compare_csv(c: &Comparison) -> String {
    let mut out = String::from("t,site,n_traj,se_traj,n_oracle,n_alternate,abs_diff,bound\n");
    let oracle_n = c.oracle.densities();
    let alt_n = c.alternate.densities();
    let r = &c.trajectory;
    for k in 0..r.times.len() {
        for q in 0..r.num_sites() {
            let se = r.stderr[k][q];
            let row = [
                r.times[k],
                (q + 1) as f64,
                r.mean_density[k][q],
                se,
                oracle_n[k][q],
                alt_n[k][q],
                (r.mean_density[k][q] - oracle_n[k][q]).abs(),
                STDERR_FACTOR * se + BIAS_BUDGET,
            ];
            out.push_str(&row.iter().map(|v| fmt_sig(*v)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
    }
    out
}

fn title(cfg: &ScenarioConfig, r: &EnsembleResult) -> String {
    format!(
        "{}: L={} gamma={} v={} N_traj={}",
        cfg.mode.as_str(),
        cfg.chain.sites,
        cfg.chain.hopping,
        cfg.chain.interaction,
        r.trajectories
    )
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, contents: &str) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        write_file(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    fn put_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), HarnessError> {
        let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
        self.put(name, &text)
    }
}

/// Runs the scenario and writes its files into `opts.out_dir`:
///
/// - every mode: `config.json` (the resolved configuration) and `density.csv`
/// - `closed` / `open` / `compare`: `events.csv`, and `heatmap.svg` when enabled
/// - `open` with `single`: `density_single.csv`, `events_single.csv`
/// - `lindblad-check`: `oracle.json` with integration health
/// - `compare`: `density_oracle.csv`, `compare.csv`, `verdict.json`
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ScenarioOutcome, HarnessError> {
    cfg.validate()?;
    let mut w = Writer {
        dir: &opts.out_dir,
        files: vec![],
    };
    w.put("config.json", &(cfg.to_json_string() + "\n"))?;

    let (result, verdict) = match cfg.mode {
        Mode::LindbladCheck => {
            let (run, substeps) = run_oracle(cfg, cfg.include_depolarizing)?;
            let result = oracle_result(&run, cfg);
            w.put(
                "oracle.json",
                &(serde_json::to_string_pretty(&serde_json::json!({
                    "include_depolarizing": cfg.include_depolarizing,
                    "substeps": substeps,
                    "health": run.health,
                    "final_trace": run.states.last().map(|s| s.trace().re),
                    "final_purity": run.states.last().map(|s| s.purity()),
                }))
                .expect("serializable")
                    + "\n"),
            )?;
            (result, None)
        }
        Mode::Compare => {
            let c = compare(cfg, opts.execution)?;
            w.put("density_oracle.csv", &density_csv(&oracle_result(&c.oracle, cfg)))?;
            w.put("compare.csv", &compare_csv(&c))?;
            w.put_json("verdict.json", &c.verdict)?;
            (c.trajectory, Some(c.verdict))
        }
        Mode::Closed | Mode::Open => {
            let result = run_trajectories(cfg, opts.execution)?;
            if opts.single && cfg.mode == Mode::Open {
                let h = build_chain_hamiltonian(&cfg.chain)?;
                let plan = build_step(&h, cfg.run.dt())?;
                let rec = run_trajectory(&plan, &cfg.contact_specs(), &cfg.run, &cfg.init_sites, 0)?;
                let single = EnsembleResult::from_records(&[rec], cfg.run.dt());
                w.put("density_single.csv", &density_csv(&single))?;
                w.put("events_single.csv", &events_csv(&single.events))?;
            }
            (result, None)
        }
    };

    w.put("density.csv", &density_csv(&result))?;
    if cfg.mode != Mode::LindbladCheck {
        w.put("events.csv", &events_csv(&result.events))?;
    }
    if cfg.emit_heatmap {
        w.put("heatmap.svg", &heatmap_svg(&result, &title(cfg, &result)))?;
    }
    Ok(ScenarioOutcome {
        files: w.files,
        result,
        verdict,
    })
}
