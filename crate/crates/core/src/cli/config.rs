//! Experiment file schema (JSON) and `key=value` overrides.
//!
//! ```json
//! {
//!   "name": "fig5",
//!   "master_seed": 1,
//!   "site": { "side_length_m": 250, "ap_height_m": 6, "mtd_height_m": 1.5 },
//!   "radio": { ... },
//!   "experiment": {
//!     "kind": "outage_sweep",
//!     "total_antennas": 64, "antennas_per_ap": 4, "active_devices": 16,
//!     "alarm": { "epicenter_fraction": [0.25, 0.25], "intensity_m": 50 },
//!     "combiner": "mmse",
//!     "network_realizations": 100, "fading_realizations": 1000,
//!     "sweep": { "axis": "K", "values": [16, 32, 48, 64] }
//!   }
//! }
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::RadioConfig;
use crate::geometry::{DeploymentKind, DeploymentSpec, SiteConfig};
use crate::montecarlo::{AlarmSpec, SimConfig, SweepAxis, SweepPlan, TrafficKind};
use crate::receiver::CombinerKind;
use crate::traffic::{TrafficMode, TrafficModel};

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub master_seed: u64,
    pub site: SiteConfig,
    #[serde(default)]
    pub radio: RadioConfig,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    OutageSweep(OutageSweep),
    AlarmValidation(AlarmValidation),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutageSweep {
    pub total_antennas: usize,
    pub antennas_per_ap: usize,
    pub active_devices: usize,
    #[serde(default)]
    pub alarm: AlarmSpec,
    #[serde(default)]
    pub combiner: CombinerKind,
    pub network_realizations: usize,
    pub fading_realizations: usize,
    pub sweep: SweepSpec,
    #[serde(default = "all_deployments")]
    pub deployments: Vec<DeploymentKind>,
    #[serde(default = "all_traffic")]
    pub traffic: Vec<TrafficKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Empirical check of the alarm sampler against the truncated Gaussian marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlarmValidation {
    pub alarm: AlarmSpec,
    pub devices_per_realization: usize,
    pub network_realizations: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn all_deployments() -> Vec<DeploymentKind> {
    DeploymentKind::ALL.to_vec()
}

fn all_traffic() -> Vec<TrafficKind> {
    TrafficKind::ALL.to_vec()
}

fn default_bins() -> usize {
    50
}

/// Short names accepted by `--set` in place of full dotted paths.
const ALIASES: &[(&str, &str)] = &[
    ("seed", "master_seed"),
    ("fading", "experiment.fading_realizations"),
    ("network_realizations", "experiment.network_realizations"),
    ("combiner", "experiment.combiner"),
    ("K", "experiment.active_devices"),
    ("M", "experiment.total_antennas"),
    ("S", "experiment.antennas_per_ap"),
    ("l", "site.side_length_m"),
];

impl ExperimentFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
        Self::from_value(unwrap_manifest(value))
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        let file: ExperimentFile =
            serde_json::from_value(value).map_err(|e| CliError::Config(format!("schema error: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    /// Loads an experiment file, or the `config` section of a run manifest.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid JSON in {}: {e}", path.display())))?;
        value = unwrap_manifest(value);
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        Self::from_value(value)
    }

    pub fn to_pretty_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("experiment serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.trim().is_empty() {
            return Err(CliError::Config("name must not be empty".into()));
        }
        self.site.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.radio.validate().map_err(|e| CliError::Config(e.to_string()))?;
        match &self.experiment {
            Experiment::OutageSweep(o) => {
                if o.sweep.values.is_empty() {
                    return Err(CliError::Config("sweep.values must not be empty".into()));
                }
                if o.deployments.is_empty() || o.traffic.is_empty() {
                    return Err(CliError::Config("deployments and traffic must not be empty".into()));
                }
                if o.network_realizations == 0 || o.fading_realizations == 0 {
                    return Err(CliError::Config("realization counts must be at least 1".into()));
                }
                if o.antennas_per_ap == 0 || o.active_devices == 0 || o.total_antennas == 0 {
                    return Err(CliError::Config("antenna and device counts must be at least 1".into()));
                }
                check_alarm(&o.alarm)?;
                Ok(())
            }
            Experiment::AlarmValidation(a) => {
                if a.devices_per_realization == 0 || a.network_realizations == 0 || a.bins == 0 {
                    return Err(CliError::Config("alarm validation counts must be at least 1".into()));
                }
                check_alarm(&a.alarm)
            }
        }
    }

    /// Sweep plan for an outage experiment.
    pub fn sweep_plan(&self) -> Result<SweepPlan, CliError> {
        let Experiment::OutageSweep(o) = &self.experiment else {
            return Err(CliError::Config("not an outage sweep experiment".into()));
        };
        // the base deployment only carries M; each point rebuilds its own spec
        let base = SimConfig {
            deployment: DeploymentSpec::centralized(o.total_antennas).map_err(|e| CliError::Config(e.to_string()))?,
            site: self.site,
            radio: self.radio,
            traffic: TrafficModel { mode: TrafficMode::Regular, active_count: o.active_devices },
            network_realizations: o.network_realizations,
            fading_realizations_per_network: o.fading_realizations,
            combiner: o.combiner,
            master_seed: self.master_seed,
        };
        Ok(SweepPlan {
            base,
            antennas_per_ap: o.antennas_per_ap,
            alarm: o.alarm,
            axis: o.sweep.axis,
            values: o.sweep.values.clone(),
            deployments: o.deployments.clone(),
            traffic: o.traffic.clone(),
        })
    }
}

fn check_alarm(a: &AlarmSpec) -> Result<(), CliError> {
    let [fx, fy] = a.epicenter_fraction;
    if !((0.0..=1.0).contains(&fx) && (0.0..=1.0).contains(&fy)) {
        return Err(CliError::Config("alarm.epicenter_fraction must lie in [0, 1]".into()));
    }
    if !(a.intensity_m.is_finite() && a.intensity_m > 0.0) {
        return Err(CliError::Config("alarm.intensity_m must be > 0".into()));
    }
    Ok(())
}

fn unwrap_manifest(value: Value) -> Value {
    match value {
        Value::Object(mut map) if map.contains_key("manifest_version") => map.remove("config").unwrap_or(Value::Null),
        other => other,
    }
}

/// Applies `key=value` to the raw JSON tree. The value is parsed as JSON when
/// possible and kept as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{assignment}' is not key=value")))?;
    let key = key.trim();
    let path = resolve_key(root, key)?;
    let parsed: Value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));

    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("override '{key}': '{part}' is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

fn resolve_key(root: &Value, key: &str) -> Result<String, CliError> {
    if key.is_empty() {
        return Err(CliError::Config("empty override key".into()));
    }
    if key.contains('.') {
        return Ok(key.to_string());
    }
    if let Some((_, path)) = ALIASES.iter().find(|(alias, _)| *alias == key) {
        return Ok(path.to_string());
    }
    if root.get(key).is_some() {
        return Ok(key.to_string());
    }
    if root.get("experiment").and_then(|e| e.get(key)).is_some() {
        return Ok(format!("experiment.{key}"));
    }
    Err(CliError::Config(format!("unknown override key '{key}'")))
}
