//! JSON scenario files.
//!
//! ```json
//! {
//!   "mode": "open",
//!   "L": 7, "gamma_meV": 3.0, "v_meV": 10.0,
//!   "contacts": [
//!     {"site": 0, "Gamma_meV": 0.5, "f": 1.0, "label": "S"},
//!     {"site": 6, "Gamma_meV": 0.5, "eps_meV": 0.0, "mu_meV": -5.0, "kT_meV": 0.1}
//!   ],
//!   "t_final": 20.0, "N_t": 40, "N_traj": 2000, "seed": 7,
//!   "record_every": 1, "init_sites": [0], "include_depolarizing": true
//! }
//! ```
//!
//! Sites are 0-based. A contact gives either `Gamma_meV` or the
//! dimensionless per-step probability `eta` (converted with
//! `Gamma = eta * N_t / t_final`), and either `f` or the Fermi-Dirac triple
//! `eps_meV`, `mu_meV`, `kT_meV`.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::fermion_model::ChainSpec;
use crate::lindblad::ORACLE_LIMIT;
use crate::open_system::{fermi_dirac, ContactSpec, RunConfig};
use crate::statevector::MAX_QUBITS;

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_OPEN_TRAJECTORIES: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Closed,
    Open,
    LindbladCheck,
    Compare,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Closed => "closed",
            Mode::Open => "open",
            Mode::LindbladCheck => "lindblad-check",
            Mode::Compare => "compare",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coupling {
    /// `Gamma` in meV.
    Rate(f64),
    /// Per-step probability `eta = Gamma * dt`.
    Eta(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Occupation {
    Fixed(f64),
    FermiDirac { eps: f64, mu: f64, kt: f64 },
}

impl Occupation {
    pub fn value(&self) -> f64 {
        match *self {
            Occupation::Fixed(f) => f,
            Occupation::FermiDirac { eps, mu, kt } => fermi_dirac(eps, mu, kt),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContactConfig {
    pub site: usize,
    pub coupling: Coupling,
    pub occupation: Occupation,
    pub label: String,
}

impl ContactConfig {
    pub fn rate(&self, dt: f64) -> f64 {
        match self.coupling {
            Coupling::Rate(g) => g,
            Coupling::Eta(eta) => eta / dt,
        }
    }

    pub fn to_spec(&self, dt: f64) -> ContactSpec {
        ContactSpec {
            qubit: self.site,
            coupling: self.rate(dt),
            occupation: self.occupation.value(),
            label: self.label.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub chain: ChainSpec,
    pub contacts: Vec<ContactConfig>,
    pub run: RunConfig,
    pub init_sites: Vec<usize>,
    pub include_depolarizing: bool,
    pub output_path: String,
    pub emit_heatmap: bool,
}

impl ScenarioConfig {
    pub fn contact_specs(&self) -> Vec<ContactSpec> {
        let dt = self.run.dt();
        self.contacts.iter().map(|c| c.to_spec(dt)).collect()
    }

    /// Canonical JSON form; [`parse_config`] reads it back unchanged.
    pub fn to_json(&self) -> Value {
        let contacts: Vec<Value> = self
            .contacts
            .iter()
            .map(|c| {
                let mut obj = serde_json::Map::new();
                obj.insert("site".into(), json!(c.site));
                match c.coupling {
                    Coupling::Rate(g) => obj.insert("Gamma_meV".into(), json!(g)),
                    Coupling::Eta(e) => obj.insert("eta".into(), json!(e)),
                };
                match c.occupation {
                    Occupation::Fixed(f) => {
                        obj.insert("f".into(), json!(f));
                    }
                    Occupation::FermiDirac { eps, mu, kt } => {
                        obj.insert("eps_meV".into(), json!(eps));
                        obj.insert("mu_meV".into(), json!(mu));
                        obj.insert("kT_meV".into(), json!(kt));
                    }
                }
                obj.insert("label".into(), json!(c.label));
                Value::Object(obj)
            })
            .collect();
        json!({
            "mode": self.mode.as_str(),
            "L": self.chain.sites,
            "gamma_meV": self.chain.hopping,
            "v_meV": self.chain.interaction,
            "contacts": contacts,
            "t_final": self.run.t_final,
            "N_t": self.run.steps,
            "N_traj": self.run.trajectories,
            "seed": self.run.seed,
            "record_every": self.run.record_every,
            "init_sites": self.init_sites,
            "include_depolarizing": self.include_depolarizing,
            "output_path": self.output_path,
            "emit_heatmap": self.emit_heatmap,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("config serializes")
    }

    /// Re-checks the constraints of an already-built config (presets, edits).
    pub fn validate(&self) -> Result<(), ConfigError> {
        parse_value(self.to_json()).map(|_| ())
    }
}

/// One failed constraint, located by key path (`contacts[1].Gamma_meV`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("invalid config:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ConfigIssue>),
}

impl ConfigError {
    pub fn issues(&self) -> &[ConfigIssue] {
        match self {
            ConfigError::Syntax(_) => &[],
            ConfigError::Invalid(v) => v,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContact {
    site: i64,
    #[serde(rename = "Gamma_meV", alias = "Gamma")]
    gamma: Option<f64>,
    eta: Option<f64>,
    f: Option<f64>,
    #[serde(rename = "eps_meV", alias = "eps")]
    eps: Option<f64>,
    #[serde(rename = "mu_meV", alias = "mu")]
    mu: Option<f64>,
    #[serde(rename = "kT_meV", alias = "kT")]
    kt: Option<f64>,
    label: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Mode,
    #[serde(rename = "L")]
    sites: i64,
    #[serde(rename = "gamma_meV", alias = "gamma")]
    hopping: f64,
    #[serde(rename = "v_meV", alias = "v")]
    interaction: f64,
    #[serde(default)]
    contacts: Vec<RawContact>,
    t_final: f64,
    #[serde(rename = "N_t")]
    steps: i64,
    #[serde(rename = "N_traj")]
    trajectories: Option<i64>,
    seed: Option<u64>,
    record_every: Option<i64>,
    #[serde(rename = "init_sites", alias = "init", default)]
    init_sites: Vec<i64>,
    include_depolarizing: Option<bool>,
    output_path: Option<String>,
    emit_heatmap: Option<bool>,
}

/// Parses and validates a JSON scenario. All constraint violations are
/// reported together.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    parse_value(value)
}

pub fn parse_value(value: Value) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_value(value).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut issues = Vec::new();
    let mut issue = |path: &str, message: String| {
        issues.push(ConfigIssue {
            path: path.to_string(),
            message,
        })
    };

    let limit = match raw.mode {
        Mode::Compare | Mode::LindbladCheck => ORACLE_LIMIT,
        _ => MAX_QUBITS,
    };
    if raw.sites < 1 {
        issue("L", format!("must be at least 1, got {}", raw.sites));
    } else if raw.sites as usize > limit {
        issue(
            "L",
            format!(
                "{} mode supports at most {limit} sites, got {}",
                raw.mode.as_str(),
                raw.sites
            ),
        );
    }
    let sites = raw.sites.max(0) as usize;
    if !raw.hopping.is_finite() {
        issue("gamma_meV", "must be finite".into());
    }
    if !raw.interaction.is_finite() {
        issue("v_meV", "must be finite".into());
    }
    if !(raw.t_final.is_finite() && raw.t_final > 0.0) {
        issue("t_final", format!("must be positive, got {}", raw.t_final));
    }
    if raw.steps < 1 {
        issue("N_t", format!("must be at least 1, got {}", raw.steps));
    }
    let default_traj = if raw.mode == Mode::Closed {
        1
    } else {
        DEFAULT_OPEN_TRAJECTORIES as i64
    };
    let trajectories = raw.trajectories.unwrap_or(default_traj);
    if trajectories < 1 {
        issue("N_traj", format!("must be at least 1, got {trajectories}"));
    }
    let record_every = raw.record_every.unwrap_or(1);
    if record_every < 1 {
        issue("record_every", format!("must be at least 1, got {record_every}"));
    }

    let mut init_sites = Vec::new();
    for (k, &s) in raw.init_sites.iter().enumerate() {
        let path = format!("init_sites[{k}]");
        if s < 0 || s as usize >= sites {
            issue(&path, format!("site {s} outside 0..{sites}"));
        } else if init_sites.contains(&(s as usize)) {
            issue(&path, format!("site {s} listed twice"));
        } else {
            init_sites.push(s as usize);
        }
    }

    let dt = if raw.steps >= 1 {
        raw.t_final / raw.steps as f64
    } else {
        f64::NAN
    };
    let mut contacts = Vec::new();
    let mut eta_per_site = vec![0.0; sites];
    for (k, c) in raw.contacts.iter().enumerate() {
        let at = |key: &str| format!("contacts[{k}].{key}");
        let site_ok = c.site >= 0 && (c.site as usize) < sites;
        if !site_ok {
            issue(&at("site"), format!("site {} outside 0..{sites}", c.site));
        }
        let coupling = match (c.gamma, c.eta) {
            (Some(g), None) => {
                if !(g.is_finite() && g >= 0.0) {
                    issue(&at("Gamma_meV"), format!("must be finite and non-negative, got {g}"));
                }
                Some(Coupling::Rate(g))
            }
            (None, Some(e)) => {
                if !(e.is_finite() && e >= 0.0) {
                    issue(&at("eta"), format!("must be finite and non-negative, got {e}"));
                }
                Some(Coupling::Eta(e))
            }
            (Some(_), Some(_)) => {
                issue(&at("Gamma_meV"), "give either Gamma_meV or eta, not both".into());
                None
            }
            (None, None) => {
                issue(&at("Gamma_meV"), "missing coupling (Gamma_meV or eta)".into());
                None
            }
        };
        let occupation = match (c.f, c.eps, c.mu, c.kt) {
            (Some(f), None, None, None) => {
                if !(0.0..=1.0).contains(&f) {
                    issue(&at("f"), format!("must lie in [0, 1], got {f}"));
                }
                Some(Occupation::Fixed(f))
            }
            (None, Some(eps), Some(mu), Some(kt)) => {
                if !(eps.is_finite() && mu.is_finite()) {
                    issue(&at("eps_meV"), "eps_meV and mu_meV must be finite".into());
                }
                if !(kt.is_finite() && kt >= 0.0) {
                    issue(&at("kT_meV"), format!("must be finite and non-negative, got {kt}"));
                }
                Some(Occupation::FermiDirac { eps, mu, kt })
            }
            _ => {
                issue(&at("f"), "give either f or all of eps_meV, mu_meV, kT_meV".into());
                None
            }
        };
        if let (Some(coupling), Some(occupation)) = (coupling, occupation) {
            let label = c.label.clone().unwrap_or_else(|| match occupation {
                Occupation::Fixed(1.0) => "S".to_string(),
                Occupation::Fixed(0.0) => "D".to_string(),
                _ => format!("C{k}"),
            });
            let cc = ContactConfig {
                site: c.site.max(0) as usize,
                coupling,
                occupation,
                label,
            };
            if dt.is_finite() {
                let eta = cc.rate(dt) * dt;
                let key = if matches!(coupling, Coupling::Eta(_)) {
                    "eta"
                } else {
                    "Gamma_meV"
                };
                if eta > 1.0 {
                    issue(&at(key), format!("eta exceeds 1 (Gamma * t_final / N_t = {eta})"));
                } else if site_ok {
                    eta_per_site[cc.site] += eta;
                }
            }
            contacts.push(cc);
        }
    }
    for (s, &total) in eta_per_site.iter().enumerate() {
        if total > 1.0 {
            issue(
                "contacts",
                format!("eta exceeds 1 on site {s} summed over its contacts ({total})"),
            );
        }
    }

    match raw.mode {
        Mode::Closed if !raw.contacts.is_empty() => {
            issue("contacts", "closed mode takes no contacts".into());
        }
        Mode::Open | Mode::Compare if raw.contacts.is_empty() => {
            issue(
                "contacts",
                format!("{} mode needs at least one contact", raw.mode.as_str()),
            );
        }
        _ => {}
    }

    if !issues.is_empty() {
        return Err(ConfigError::Invalid(issues));
    }
    Ok(ScenarioConfig {
        mode: raw.mode,
        chain: ChainSpec {
            sites,
            hopping: raw.hopping,
            interaction: raw.interaction,
        },
        contacts,
        run: RunConfig {
            t_final: raw.t_final,
            steps: raw.steps as usize,
            trajectories: trajectories as usize,
            seed: raw.seed.unwrap_or(DEFAULT_SEED),
            record_every: record_every as usize,
        },
        init_sites,
        include_depolarizing: raw.include_depolarizing.unwrap_or(true),
        output_path: raw.output_path.unwrap_or_else(|| "out".to_string()),
        emit_heatmap: raw.emit_heatmap.unwrap_or(false),
    })
}
