//! Experiment configuration: a TOML document with one section per module.
//!
//! Unknown keys are rejected everywhere. Overrides use dotted paths
//! (`quantum.sites=6`) and are applied to the parsed document before it is
//! checked against the schema, so an override of a misspelled key fails the
//! same way the key would in the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tcsim_core::quantum::EvolutionPath;
use toml::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Quantum,
    Oscillator,
    Pca,
    Cdw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Sub-experiment, e.g. `magnetization` or `staircase`.
    pub name: String,
    /// First replica seed; replicas use `seed, seed + 1, ...`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replicas: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<QuantumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillator: Option<OscillatorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pca: Option<PcaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cdw: Option<CdwConfig>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantumModel {
    Mbl,
    Sycamore,
    Ion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialSpins {
    Random,
    Up,
    Neel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumConfig {
    #[serde(default = "default_model")]
    pub model: QuantumModel,
    pub sites: usize,
    /// Pulse error of the MBL and ion drives.
    #[serde(default)]
    pub epsilon: f64,
    /// Kick angle of the Sycamore circuit in units of `pi / 2`.
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default = "yes")]
    pub interacting: bool,
    #[serde(default = "default_periods")]
    pub periods: usize,
    #[serde(default = "default_initial")]
    pub initial: InitialSpins,
    #[serde(default)]
    pub path: EvolutionPath,
    /// Samples in the subharmonic window ending at the last period.
    #[serde(default = "default_window")]
    pub window: usize,
    /// Upper end and size of the pulse-error grid of the variance scan.
    #[serde(default = "default_eps_max")]
    pub epsilon_max: f64,
    #[serde(default = "default_eps_steps")]
    pub epsilon_steps: usize,
}

fn default_model() -> QuantumModel {
    QuantumModel::Mbl
}
fn default_g() -> f64 {
    0.97
}
fn yes() -> bool {
    true
}
fn default_periods() -> usize {
    100
}
fn default_initial() -> InitialSpins {
    InitialSpins::Random
}
fn default_window() -> usize {
    20
}
fn default_eps_max() -> f64 {
    0.2
}
fn default_eps_steps() -> usize {
    11
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Periodic,
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorConfig {
    #[serde(default = "unit")]
    pub omega0: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "two")]
    pub omega_d: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub phase: f64,
    /// Mathieu point `a = (2 omega0 / omega_d)^2` for the monodromy experiment.
    #[serde(default = "unit")]
    pub a: f64,
    /// Mathieu damping `c`.
    #[serde(default)]
    pub damping: f64,
    #[serde(default = "one")]
    pub sites: usize,
    #[serde(default)]
    pub coupling: f64,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryKind,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_osc_periods")]
    pub periods: usize,
    #[serde(default = "default_osc_substeps")]
    pub substeps: usize,
    /// Initial displacement of every site; the lifetime experiment starts on
    /// the period-doubled orbit instead.
    #[serde(default = "default_q0")]
    pub q0: f64,
    #[serde(default)]
    pub p0: f64,
    #[serde(default = "default_chart")]
    pub chart: ChartConfig,
}

fn unit() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn default_boundary() -> BoundaryKind {
    BoundaryKind::Periodic
}
fn default_osc_periods() -> usize {
    1000
}
fn default_osc_substeps() -> usize {
    tcsim_core::oscillator::chain::DEFAULT_SUBSTEPS
}
fn default_q0() -> f64 {
    0.5
}
fn default_chart() -> ChartConfig {
    ChartConfig {
        a_min: 0.25,
        a_max: 5.0,
        a_steps: 48,
        delta_min: 0.0,
        delta_max: 1.5,
        delta_steps: 32,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub a_min: f64,
    pub a_max: f64,
    pub a_steps: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaRuleKind {
    Toom,
    PiToom,
    /// Glauber dynamics at the temperature and field matched to the noise.
    Glauber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcaConfig {
    #[serde(default = "default_rule")]
    pub rule: PcaRuleKind,
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default = "default_pca_steps")]
    pub steps: usize,
    /// Noise bias `(p - q)/(p + q)`.
    #[serde(default)]
    pub bias: f64,
    /// Noise amplitude `p + q`.
    #[serde(default)]
    pub amplitude: f64,
}

fn default_rule() -> PcaRuleKind {
    PcaRuleKind::Toom
}
fn default_size() -> usize {
    64
}
fn default_pca_steps() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdwModel {
    Single,
    Chain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdwConfig {
    #[serde(default = "default_cdw_model")]
    pub model: CdwModel,
    #[serde(default = "unit")]
    pub omega0_tau: f64,
    #[serde(default = "unit")]
    pub e_threshold: f64,
    #[serde(default)]
    pub e_ac: f64,
    #[serde(default = "unit")]
    pub omega_d: f64,
    #[serde(default)]
    pub inertial: bool,
    pub e_dc_min: f64,
    pub e_dc_max: f64,
    pub e_dc_steps: usize,
    #[serde(default = "default_cdw_periods")]
    pub periods: f64,
    #[serde(default = "default_cdw_substeps")]
    pub substeps: usize,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_lock")]
    pub lock_tolerance: f64,
    #[serde(default = "default_max_q")]
    pub max_denominator: u32,
    #[serde(default = "default_cdw_sites")]
    pub sites: usize,
    #[serde(default)]
    pub stiffness: f64,
}

fn default_cdw_model() -> CdwModel {
    CdwModel::Single
}
fn default_cdw_periods() -> f64 {
    200.0
}
fn default_cdw_substeps() -> usize {
    tcsim_core::cdw::integrate::DEFAULT_SUBSTEPS
}
fn default_lock() -> f64 {
    1e-3
}
fn default_max_q() -> u32 {
    4
}
fn default_cdw_sites() -> usize {
    8
}

impl ExperimentConfig {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replicas as u64).map(|i| self.seed + i).collect()
    }

    /// Effective configuration as TOML; parsing it back yields `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    fn section_missing(&self) -> Option<&'static str> {
        match self.experiment {
            ExperimentKind::Quantum if self.quantum.is_none() => Some("quantum"),
            ExperimentKind::Oscillator if self.oscillator.is_none() => Some("oscillator"),
            ExperimentKind::Pca if self.pca.is_none() => Some("pca"),
            ExperimentKind::Cdw if self.cdw.is_none() => Some("cdw"),
            _ => None,
        }
    }

    /// Checks that do not need the simulation kernels.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.replicas == 0 {
            return Err(CliError::field("replicas", "must be at least 1"));
        }
        if let Some(section) = self.section_missing() {
            return Err(CliError::field(section, "section is required for this experiment"));
        }
        let names: &[&str] = match self.experiment {
            ExperimentKind::Quantum => &["magnetization", "spectrum", "echo", "variance"],
            ExperimentKind::Oscillator => &["monodromy", "chart", "trajectory", "lifetime"],
            ExperimentKind::Pca => &["trajectory", "retention", "lifetime"],
            ExperimentKind::Cdw => &["staircase"],
        };
        if !names.contains(&self.name.as_str()) {
            return Err(CliError::field(
                "name",
                format!("unknown sub-experiment `{}`, expected one of {}", self.name, names.join(", ")),
            ));
        }
        if let Some(q) = &self.quantum {
            if q.sites == 0 {
                return Err(CliError::field("quantum.sites", "must be at least 1"));
            }
            if q.periods == 0 {
                return Err(CliError::field("quantum.periods", "must be at least 1"));
            }
            if q.epsilon_steps == 0 {
                return Err(CliError::field("quantum.epsilon_steps", "must be at least 1"));
            }
        }
        if let Some(o) = &self.oscillator {
            if o.sites == 0 {
                return Err(CliError::field("oscillator.sites", "must be at least 1"));
            }
            if o.periods == 0 {
                return Err(CliError::field("oscillator.periods", "must be at least 1"));
            }
        }
        if let Some(p) = &self.pca {
            if p.size < 2 {
                return Err(CliError::field("pca.size", "must be at least 2"));
            }
            if p.steps == 0 {
                return Err(CliError::field("pca.steps", "must be at least 1"));
            }
        }
        if let Some(c) = &self.cdw {
            if c.e_dc_steps < 2 {
                return Err(CliError::field("cdw.e_dc_steps", "need at least two grid points"));
            }
            if !(c.e_dc_max > c.e_dc_min) {
                return Err(CliError::field("cdw.e_dc_max", "must exceed e_dc_min"));
            }
            if c.sites == 0 {
                return Err(CliError::field("cdw.sites", "must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Parses a `key=value` override. The value is read as a TOML literal and
/// falls back to a bare string.
pub fn parse_override(spec: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Validation(format!("override `{spec}` has an empty key")));
    }
    Ok((key.to_string(), parse_literal(raw.trim())))
}

pub fn parse_literal(raw: &str) -> Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Sets `path` inside `doc`, creating intermediate tables.
pub fn set_path(doc: &mut toml::Table, path: &str, value: Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().expect("split yields at least one part");
    let mut table = doc;
    for (depth, part) in parts.iter().enumerate() {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| {
            CliError::Validation(format!(
                "cannot set `{path}`: `{}` is not a table",
                parts[..=depth].join(".")
            ))
        })?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// Parses, applies overrides and validates.
pub fn load_str(text: &str, overrides: &[(String, Value)]) -> Result<ExperimentConfig, CliError> {
    // Parse the file as written first so diagnostics carry its line numbers.
    let mut doc: toml::Table = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
    let cfg: ExperimentConfig = if overrides.is_empty() {
        toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?
    } else {
        for (k, v) in overrides {
            set_path(&mut doc, k, v.clone())?;
        }
        let merged = toml::to_string(&doc).map_err(|e| CliError::Validation(e.to_string()))?;
        toml::from_str(&merged)
            .map_err(|e| CliError::Validation(format!("after overrides: {e}")))?
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(path: &Path, overrides: &[(String, Value)]) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    load_str(&text, overrides).map_err(|e| match e {
        CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })
}
