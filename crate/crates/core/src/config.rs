//! Run configuration: a TOML document with one table per section.
//!
//! ```toml
//! [machine]            # all 13 parameters required, no defaults
//! r_s_alpha = 7.14
//! # ...
//! pole_pairs = 2
//! inertia_j = 2.92e-3
//!
//! [supply]
//! frequency = 50.0            # Hz, required
//! voltage = 230.0             # quadrature supply; RMS unless amplitude_is_peak
//! amplitude_is_peak = false   # default
//! sequence = "forward"        # or "reverse"; default forward
//! # alternatively, explicit per-phase harmonics (peak volts, radians):
//! # alpha = [{ order = 1, amplitude = 325.0, phase = 0.0 }]
//! # beta  = [{ order = 1, amplitude = 325.0, phase = -1.5707963267948966 }]
//!
//! [load]
//! torque = 1.0096             # constant, or:
//! # breakpoints = [[0.0, 0.0], [0.5, 1.0096]]   # (t_start, torque)
//!
//! [integrator]
//! method = "rk4"              # or "euler"; default rk4
//! step_size = 1e-4            # default 1e-4
//! duration = 1.0              # required
//! record_every = 1            # default 1
//!
//! [initial_state]             # all default to 0 (start from rest)
//! [model]                     # speed_convention = "mechanical_state" | "electrical_state"
//!                             # torque_model = "mutual_inductance" | "energy_consistent"
//!                             # blocked_rotor = false
//! [analysis]                  # speed_tol = 1e-3, window = 0.1
//! [output]                    # dir = "output", emit_plot_script = false
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::SteadyStateCriteria;
use crate::dynamics::{IntegratorConfig, IntegratorError, Scenario};
use crate::excitation::{Excitation, ExcitationError, Harmonic, LoadProfile, PhaseSequence, VoltageSource};
use crate::machine::{MachineParameters, MachineState, ModelOptions, ParameterError, ValidatedParameters};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("machine: {0}")]
    Machine(#[from] ParameterError),
    #[error("supply/load: {0}")]
    Excitation(#[from] ExcitationError),
    #[error("integrator: {0}")]
    Integrator(#[from] IntegratorError),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("'{0}' is neither a config file nor a built-in config ({names})", names = BUILTIN_NAMES.join(", "))]
    UnknownConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupplyConfig {
    pub frequency: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voltage: Option<f64>,
    #[serde(default)]
    pub amplitude_is_peak: bool,
    #[serde(default)]
    pub sequence: PhaseSequence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<Harmonic>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<Harmonic>>,
}

impl SupplyConfig {
    pub fn source(&self) -> Result<VoltageSource, ConfigError> {
        match (self.voltage, &self.alpha, &self.beta) {
            (Some(v), None, None) => {
                if !(v.is_finite() && v > 0.0) {
                    return Err(ExcitationError::Voltage(v).into());
                }
                let peak = if self.amplitude_is_peak { v } else { std::f64::consts::SQRT_2 * v };
                Ok(VoltageSource::quadrature(peak, self.frequency, self.sequence)?)
            }
            (None, Some(a), Some(b)) => {
                Ok(VoltageSource::new(self.frequency, a.clone(), b.clone())?)
            }
            _ => Err(ConfigError::Invalid(
                "supply: set either `voltage` or both `alpha` and `beta`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torque: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<[f64; 2]>>,
}

impl LoadConfig {
    pub fn profile(&self) -> Result<LoadProfile, ConfigError> {
        match (self.torque, &self.breakpoints) {
            (Some(t), None) => Ok(LoadProfile::constant(t)?),
            (None, Some(b)) => Ok(LoadProfile::new(b.iter().map(|&[t, tq]| (t, tq)).collect())?),
            _ => Err(ConfigError::Invalid(
                "load: set exactly one of `torque` or `breakpoints`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub speed_tol: f64,
    pub window: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let c = SteadyStateCriteria::default();
        Self { speed_tol: c.speed_tol, window: c.window }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub emit_plot_script: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("output"), emit_plot_script: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub machine: MachineParameters,
    pub supply: SupplyConfig,
    pub load: LoadConfig,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub initial_state: MachineState,
    #[serde(default)]
    pub model: ModelOptions,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A config with every sub-part validated and assembled.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub params: ValidatedParameters,
    pub scenario: Scenario,
    pub criteria: SteadyStateCriteria,
    pub supply_frequency: f64,
}

impl RunConfig {
    pub fn resolve(&self) -> Result<ResolvedRun, ConfigError> {
        let params = self.machine.validate()?;
        let supply = self.supply.source()?;
        let load = self.load.profile()?;
        self.integrator.validate()?;
        if !self.initial_state.is_finite() {
            return Err(IntegratorError::InitialState.into());
        }
        let AnalysisConfig { speed_tol, window } = self.analysis;
        if !(speed_tol.is_finite() && speed_tol > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "analysis: speed_tol must be positive (got {speed_tol})"
            )));
        }
        if !(window.is_finite() && window > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "analysis: window must be positive (got {window})"
            )));
        }
        Ok(ResolvedRun {
            params,
            supply_frequency: supply.frequency(),
            scenario: Scenario {
                excitation: Excitation { supply, load },
                integrator: self.integrator,
                initial_state: self.initial_state,
                options: self.model,
            },
            criteria: SteadyStateCriteria { speed_tol, window, averaging_period: None },
        })
    }

    /// The fully expanded config, defaults included. Re-parses to `self`.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("RunConfig always serializes")
    }

    pub fn to_value(&self) -> toml::Table {
        toml::Table::try_from(self).expect("RunConfig always serializes")
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    config.resolve()?;
    Ok(config)
}

fn from_table(table: toml::Table) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    config.resolve()?;
    Ok(config)
}

pub const BUILTIN_NAMES: [&str; 3] = ["paper_s3", "symmetric_check", "blocked_rotor"];

pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "paper_s3" => Some(include_str!("../configs/paper_s3.toml")),
        "symmetric_check" => Some(include_str!("../configs/symmetric_check.toml")),
        "blocked_rotor" => Some(include_str!("../configs/blocked_rotor.toml")),
        _ => None,
    }
}

/// Reads `arg` as a file when it exists, otherwise looks it up among the
/// built-in configs.
pub fn load_source(arg: &str) -> Result<String, ConfigError> {
    let path = Path::new(arg);
    if path.is_file() {
        return std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source });
    }
    builtin(arg)
        .map(str::to_owned)
        .ok_or_else(|| ConfigError::UnknownConfig(arg.to_owned()))
}

/// A one-dimensional parameter sweep over a dotted config path.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: RunConfig,
    pub axis: String,
    pub values: Vec<f64>,
    pub columns: Vec<String>,
}

impl SweepSpec {
    /// One validated config per axis value, in axis order.
    pub fn expand(&self) -> Result<Vec<RunConfig>, ConfigError> {
        if self.values.is_empty() {
            return Err(ConfigError::Invalid("sweep needs at least one value".into()));
        }
        for c in &self.columns {
            if !crate::analysis::SummaryReport::FIELDS.contains(&c.as_str()) {
                return Err(ConfigError::Invalid(format!("unknown summary column `{c}`")));
            }
        }
        let base = self.base.to_value();
        let keys: Vec<&str> = self.axis.split('.').collect();
        let current = lookup(&base, &keys)
            .ok_or_else(|| ConfigError::Invalid(format!("sweep axis `{}` does not exist", self.axis)))?;
        let integer = match current {
            toml::Value::Integer(_) => true,
            toml::Value::Float(_) => false,
            _ => {
                return Err(ConfigError::Invalid(format!(
                    "sweep axis `{}` is not a numeric parameter",
                    self.axis
                )))
            }
        };

        self.values
            .iter()
            .map(|&v| {
                let new = if integer {
                    if v.fract() != 0.0 || v < 0.0 {
                        return Err(ConfigError::Invalid(format!(
                            "sweep axis `{}` takes non-negative integers (got {v})",
                            self.axis
                        )));
                    }
                    toml::Value::Integer(v as i64)
                } else {
                    toml::Value::Float(v)
                };
                let mut table = base.clone();
                *lookup_mut(&mut table, &keys).expect("path checked above") = new;
                from_table(table).map_err(|e| ConfigError::Invalid(format!("{} = {v}: {e}", self.axis)))
            })
            .collect()
    }
}

fn lookup<'a>(table: &'a toml::Table, keys: &[&str]) -> Option<&'a toml::Value> {
    let (last, head) = keys.split_last()?;
    let mut t = table;
    for k in head {
        t = t.get(*k)?.as_table()?;
    }
    t.get(*last)
}

fn lookup_mut<'a>(table: &'a mut toml::Table, keys: &[&str]) -> Option<&'a mut toml::Value> {
    let (last, head) = keys.split_last()?;
    let mut t = table;
    for k in head {
        t = t.get_mut(*k)?.as_table_mut()?;
    }
    t.get_mut(*last)
}
