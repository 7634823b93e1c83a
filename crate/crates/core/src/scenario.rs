//! Versioned JSON scenario files and `key=value` overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::SystemSpec;
use crate::spectral::{linear_grid, ClassifyPolicy};
use crate::spectro::{OmegaModel, ProbeSpec, TrapConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// File name of the packaged default scenario.
pub const DEFAULT_SCENARIO_FILE: &str = "rb87_6p_25d.json";

const DEFAULT_SCENARIO: &str = include_str!("../data/rb87_6p_25d.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDefaults {
    pub omega_start_mhz: f64,
    pub omega_stop_mhz: f64,
    pub omega_step_mhz: f64,
}

impl SweepDefaults {
    pub fn grid(&self) -> Result<Vec<f64>> {
        linear_grid(self.omega_start_mhz, self.omega_stop_mhz, self.omega_step_mhz)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumDefaults {
    pub peak_omega_mhz: f64,
    pub detuning_start_mhz: f64,
    pub detuning_stop_mhz: f64,
    pub detuning_step_mhz: f64,
    pub omega_model: OmegaModel,
    /// Monte-Carlo samples for the trap-sampled model.
    pub n_samples: usize,
}

impl SpectrumDefaults {
    pub fn grid(&self) -> Result<Vec<f64>> {
        linear_grid(
            self.detuning_start_mhz,
            self.detuning_stop_mhz,
            self.detuning_step_mhz,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub notes: Vec<String>,
    pub system: SystemSpec,
    pub probe: ProbeSpec,
    #[serde(default)]
    pub trap: TrapConfig,
    pub sweep: SweepDefaults,
    pub spectrum: SpectrumDefaults,
    #[serde(default)]
    pub classify: ClassifyPolicy,
    pub seed: u64,
}

impl Scenario {
    /// The packaged Rb-87 `6P_{3/2}` to `25D_{5/2}` scenario.
    pub fn rb87_default() -> Self {
        Self::from_json_str(DEFAULT_SCENARIO).expect("packaged scenario is valid")
    }

    pub fn default_json() -> &'static str {
        DEFAULT_SCENARIO
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(text)?)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let version = value.get("schema_version").and_then(Value::as_u64);
        if version != Some(u64::from(SCHEMA_VERSION)) {
            return Err(Error::Config(format!(
                "unsupported scenario schema_version {version:?}, expected {SCHEMA_VERSION}"
            )));
        }
        let s: Scenario = serde_json::from_value(value)?;
        s.validate()?;
        Ok(s)
    }

    /// Read a scenario and apply `key=value` overrides before validation.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read scenario {}: {e}", path.display()))
        })?;
        Self::from_text_with_overrides(&text, overrides)
    }

    pub fn from_text_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.probe.validate(&self.system)?;
        self.trap.validate()?;
        self.sweep.grid()?;
        if self.sweep.omega_start_mhz < 0.0 {
            return Err(Error::Config("sweep grid must be non-negative".into()));
        }
        self.spectrum.grid()?;
        if !(self.spectrum.peak_omega_mhz >= 0.0) || !self.spectrum.peak_omega_mhz.is_finite() {
            return Err(Error::Config("spectrum.peak_omega_mhz must be >= 0".into()));
        }
        if self.spectrum.n_samples == 0 {
            return Err(Error::Config("spectrum.n_samples must be positive".into()));
        }
        let c = &self.classify;
        if !(c.dark_tolerance >= 0.0) || !(c.decreasing_window > 0.0 && c.decreasing_window < 1.0) {
            return Err(Error::Config(
                "classify needs dark_tolerance >= 0 and 0 < decreasing_window < 1".into(),
            ));
        }
        Ok(())
    }
}

/// Apply one `dotted.path=value` override to a JSON document.
///
/// The value is parsed as JSON when possible (numbers, booleans, objects)
/// and taken as a plain string otherwise, so `system.detuning.f=3/2` works.
/// Intermediate objects must already exist; unknown final keys are caught
/// later by schema validation.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override key '{path}' is malformed")));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().into()));

    let (last, parents) = keys.split_last().expect("non-empty key list");
    let mut node = doc;
    for k in parents {
        node = node
            .get_mut(*k)
            .filter(|n| n.is_object())
            .ok_or_else(|| Error::Config(format!("override path '{path}': no object at '{k}'")))?;
    }
    node.as_object_mut()
        .ok_or_else(|| Error::Config(format!("override path '{path}' does not end in an object")))?
        .insert((*last).to_string(), value);
    Ok(())
}
