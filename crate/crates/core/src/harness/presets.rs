//! Built-in scenarios at desk scale. All use `dt = 0.5 hbar/meV` unless noted.

use super::config::{
    ContactConfig, Coupling, Mode, Occupation, ScenarioConfig, DEFAULT_OPEN_TRAJECTORIES, DEFAULT_SEED,
};
use super::HarnessError;
use crate::fermion_model::ChainSpec;
use crate::open_system::RunConfig;

pub const PRESET_NAMES: &[&str] = &[
    "fig2",
    "fig2-l30",
    "fig3a",
    "fig3b",
    "fig3a-eta",
    "fig4a",
    "compare-l2",
    "compare-l3",
];

fn contact(site: usize, coupling: Coupling, f: f64, label: &str) -> ContactConfig {
    ContactConfig {
        site,
        coupling,
        occupation: Occupation::Fixed(f),
        label: label.into(),
    }
}

fn source_drain(sites: usize, coupling: Coupling) -> Vec<ContactConfig> {
    vec![contact(0, coupling, 1.0, "S"), contact(sites - 1, coupling, 0.0, "D")]
}

fn open_chain(
    name: &str,
    sites: usize,
    hopping: f64,
    t_final: f64,
    coupling: Coupling,
    trajectories: usize,
) -> ScenarioConfig {
    ScenarioConfig {
        mode: Mode::Open,
        chain: ChainSpec {
            sites,
            hopping,
            interaction: 10.0,
        },
        contacts: source_drain(sites, coupling),
        run: RunConfig {
            t_final,
            steps: (t_final * 2.0).round() as usize,
            trajectories,
            seed: DEFAULT_SEED,
            record_every: 1,
        },
        init_sites: vec![0],
        include_depolarizing: true,
        output_path: format!("out/{name}"),
        emit_heatmap: true,
    }
}

fn compare_chain(name: &str, sites: usize) -> ScenarioConfig {
    ScenarioConfig {
        mode: Mode::Compare,
        chain: ChainSpec {
            sites,
            hopping: 3.0,
            interaction: 10.0,
        },
        contacts: source_drain(sites, Coupling::Rate(0.5)),
        run: RunConfig {
            t_final: 10.0,
            steps: 40,
            trajectories: 8000,
            seed: DEFAULT_SEED,
            record_every: 1,
        },
        init_sites: vec![0],
        include_depolarizing: true,
        output_path: format!("out/{name}"),
        emit_heatmap: false,
    }
}

/// Looks up a preset by name.
///
/// - `fig2`: one particle on a closed 12-site chain, `gamma = 1`, `v = 0`, `t <= 15`.
/// - `fig2-l30`: the 30-site version; refused (2^30 amplitudes).
/// - `fig3a` / `fig3b`: 7-site chain, `v = 10`, `gamma = 3` / `5`, source and
///   drain with `Gamma = 0.5 meV`, `t <= 20`.
/// - `fig3a-eta`: `fig3a` with a per-step probability `eta = 0.5` instead.
/// - `fig4a`: 12-site chain with `gamma = 5`, 500 trajectories.
/// - `compare-l2` / `compare-l3`: trajectory ensemble against the Lindblad
///   oracle, 8000 trajectories, `dt = 0.25`.
pub fn preset(name: &str) -> Result<ScenarioConfig, HarnessError> {
    let cfg = match name {
        "fig2" => ScenarioConfig {
            mode: Mode::Closed,
            chain: ChainSpec {
                sites: 12,
                hopping: 1.0,
                interaction: 0.0,
            },
            contacts: vec![],
            run: RunConfig {
                t_final: 15.0,
                steps: 30,
                trajectories: 1,
                seed: DEFAULT_SEED,
                record_every: 1,
            },
            init_sites: vec![0],
            include_depolarizing: true,
            output_path: "out/fig2".into(),
            emit_heatmap: true,
        },
        "fig2-l30" => {
            return Err(HarnessError::Unsupported {
                name: name.into(),
                reason: "a 30-site register needs 2^30 amplitudes (16 GiB); use fig2 (12 sites)".into(),
            })
        }
        "fig3a" => open_chain(name, 7, 3.0, 20.0, Coupling::Rate(0.5), DEFAULT_OPEN_TRAJECTORIES),
        "fig3b" => open_chain(name, 7, 5.0, 20.0, Coupling::Rate(0.5), DEFAULT_OPEN_TRAJECTORIES),
        "fig3a-eta" => open_chain(name, 7, 3.0, 20.0, Coupling::Eta(0.5), DEFAULT_OPEN_TRAJECTORIES),
        "fig4a" => open_chain(name, 12, 5.0, 30.0, Coupling::Rate(0.5), 500),
        "compare-l2" => compare_chain(name, 2),
        "compare-l3" => compare_chain(name, 3),
        _ => return Err(HarnessError::UnknownPreset(name.into())),
    };
    cfg.validate()?;
    Ok(cfg)
}
