//! Declarative run configuration.
//!
//! Each subcommand reads a TOML file whose top level holds
//! `schema_version` plus that subcommand's keys. Unknown keys are errors.
//! `--set key=value` overrides are applied to the parsed table before it is
//! checked, with dotted keys reaching into sub-tables.

use std::path::Path;

use ghmf_core::equilibrium::Couplings;
use ghmf_core::langevin::{InitialCondition, Scheme, DEFAULT_DT};
use ghmf_core::md::{BurnIn, MDConfig, DEFAULT_MD_DT};
use ghmf_core::params::{map_cavity_to_effective_with_tol, CavityParams, EffectiveModel, DEFAULT_STATIONARITY_TOL};
use ghmf_core::phase_diagram::GridSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: i64 = 1;

pub fn load<T: DeserializeOwned>(path: Option<&Path>, overrides: &[String], seed: Option<u64>) -> Result<T, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            text.parse::<toml::Table>().map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => {
            let mut t = toml::Table::new();
            t.insert("schema_version".into(), toml::Value::Integer(SCHEMA_VERSION));
            t
        }
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    if let Some(s) = seed {
        let v = i64::try_from(s).map_err(|_| CliError::Config(format!("seed {s} does not fit the config format")))?;
        table.insert("seed".into(), toml::Value::Integer(v));
    }
    match table.remove("schema_version") {
        Some(toml::Value::Integer(SCHEMA_VERSION)) => {}
        Some(other) => return Err(CliError::Config(format!("unsupported schema_version {other}, expected {SCHEMA_VERSION}"))),
        None => return Err(CliError::Config("config lacks schema_version".into())),
    }
    T::deserialize(table).map_err(|e| CliError::Config(e.to_string()))
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{spec}' is not key=value")))?;
    // parse the value as a TOML fragment, falling back to a bare string
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut parts: Vec<&str> = key.trim().split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| CliError::Config(format!("empty key in '{spec}'")))?;
    let mut cur = table;
    for p in parts {
        cur = cur
            .entry(p)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("'{p}' in '{key}' is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Serializes a resolved config back to the file format.
pub fn to_toml<T: Serialize>(config: &T) -> Result<String, CliError> {
    let mut t = toml::Table::try_from(config).map_err(|e| CliError::Config(e.to_string()))?;
    t.insert("schema_version".into(), toml::Value::Integer(SCHEMA_VERSION));
    toml::to_string(&t).map_err(|e| CliError::Config(e.to_string()))
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn unit_interval() -> [f64; 2] {
    [-1.0, 1.0]
}
fn default_ny() -> usize {
    101
}
fn default_tol() -> f64 {
    DEFAULT_STATIONARITY_TOL
}
fn default_langevin_dt() -> f64 {
    DEFAULT_DT
}
fn default_md_dt() -> f64 {
    DEFAULT_MD_DT
}
fn default_record() -> u64 {
    100
}
fn default_md_record() -> u64 {
    10
}
fn default_bins() -> usize {
    64
}
fn default_burn_fraction() -> f64 {
    0.5
}
fn default_replicas() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapParamsConfig {
    pub cavity: CavityParams,
    #[serde(default = "default_tol")]
    pub stationarity_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeEnergyConfig {
    pub alpha_1: f64,
    pub alpha_2: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "half")]
    pub omega_r: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "unit_interval")]
    pub y_1_range: [f64; 2],
    #[serde(default = "unit_interval")]
    pub y_2_range: [f64; 2],
    #[serde(default = "default_ny")]
    pub n_y: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointsConfig {
    pub alpha_1: f64,
    pub alpha_2: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "half")]
    pub omega_r: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    /// Starting points tried before the built-in ones.
    #[serde(default)]
    pub seeds: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramConfig {
    pub grid: GridSpec,
}

/// Effective model given directly by its couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub alpha_1: f64,
    pub alpha_2: f64,
    #[serde(default = "one")]
    pub beta: f64,
    pub n_atoms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangevinRunConfig {
    /// Exactly one of `couplings` and `cavity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<CouplingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavityParams>,
    #[serde(default = "default_langevin_dt")]
    pub dt: f64,
    pub n_steps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_record")]
    pub record_every: u64,
    pub init: InitialCondition,
    #[serde(default)]
    pub include_eta_term: bool,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum_bound: Option<f64>,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram_from: Option<u64>,
    /// Fraction of recorded samples discarded before the stationarity test.
    #[serde(default = "default_burn_fraction")]
    pub burn_in_fraction: f64,
}

impl LangevinRunConfig {
    pub fn model(&self) -> Result<EffectiveModel, CliError> {
        match (&self.couplings, &self.cavity) {
            (Some(c), None) => Ok(EffectiveModel::from_couplings(c.alpha_1, c.alpha_2, c.beta, c.n_atoms)?),
            (None, Some(c)) => Ok(map_cavity_to_effective_with_tol(c, DEFAULT_STATIONARITY_TOL)?),
            _ => Err(CliError::Config("give exactly one of [couplings] and [cavity]".into())),
        }
    }

    pub fn core(&self) -> Result<ghmf_core::langevin::LangevinConfig, CliError> {
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(CliError::Config("burn_in_fraction must lie in [0, 1)".into()));
        }
        let model = self.model()?;
        let cfg = ghmf_core::langevin::LangevinConfig {
            n_atoms: model.n_atoms,
            model,
            dt: self.dt,
            n_steps: self.n_steps,
            seed: self.seed,
            record_every: self.record_every,
            init: self.init.clone(),
            include_eta_term: self.include_eta_term,
            scheme: self.scheme,
            momentum_bound: self.momentum_bound,
            histogram_bins: self.histogram_bins,
            histogram_from: self.histogram_from,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdRunConfig {
    pub alpha_1: f64,
    pub alpha_2: f64,
    #[serde(default = "one")]
    pub beta_ref: f64,
    pub n_atoms: usize,
    #[serde(default = "default_md_dt")]
    pub dt: f64,
    pub n_steps: u64,
    pub energy_per_particle: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_md_record")]
    pub record_every: u64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub burn_in: BurnIn,
}

impl MdRunConfig {
    pub fn core(&self) -> MDConfig {
        MDConfig {
            beta_ref: self.beta_ref,
            dt: self.dt,
            record_every: self.record_every,
            scheme: self.scheme,
            burn_in: self.burn_in,
            ..MDConfig::new(Couplings::new(self.alpha_1, self.alpha_2), self.n_atoms, self.n_steps, self.energy_per_particle, self.seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaloricConfig {
    pub alpha_1: f64,
    pub alpha_2: f64,
    #[serde(default = "one")]
    pub beta_ref: f64,
    pub n_atoms: usize,
    #[serde(default = "default_md_dt")]
    pub dt: f64,
    pub n_steps: u64,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_md_record")]
    pub record_every: u64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub burn_in: BurnIn,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
}

impl CaloricConfig {
    pub fn core(&self) -> MDConfig {
        let first = self.epsilons.first().copied().unwrap_or(0.0);
        MDConfig {
            beta_ref: self.beta_ref,
            dt: self.dt,
            record_every: self.record_every,
            scheme: self.scheme,
            burn_in: self.burn_in,
            replicas: self.replicas,
            ..MDConfig::new(Couplings::new(self.alpha_1, self.alpha_2), self.n_atoms, self.n_steps, first, self.seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub alpha_1: f64,
    pub alpha_2: f64,
    #[serde(default = "one")]
    pub beta: f64,
    pub n_atoms: usize,
    #[serde(default = "default_md_dt")]
    pub dt: f64,
    pub n_steps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_md_record")]
    pub record_every: u64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub burn_in: BurnIn,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
}

impl CompareConfig {
    pub fn core(&self) -> MDConfig {
        MDConfig {
            beta_ref: self.beta,
            dt: self.dt,
            record_every: self.record_every,
            scheme: self.scheme,
            burn_in: self.burn_in,
            replicas: self.replicas,
            ..MDConfig::new(Couplings::new(self.alpha_1, self.alpha_2), self.n_atoms, self.n_steps, 0.0, self.seed)
        }
    }
}
