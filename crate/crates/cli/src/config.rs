//! JSON run configuration.
//!
//! Every section and field is optional; omitted ones take the built-in
//! defaults, so `{}` is a complete configuration. Unknown keys are rejected.
//! The defaults are documented in `configs/README.md` and can be printed with
//! `hesm-sim defaults`.

use std::fs;
use std::path::Path;

use hesm_core::plant::{BatteryModel, PlantParams, UltracapModel};
use hesm_core::sim::{ControllerConfig, IntegrationConfig, LoadProfile, SimConfig};
use hesm_core::ConfigError;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Trace file, relative to the output directory unless absolute.
    pub trace_path: String,
    /// Trace sampling rate, Hz.
    pub decimation_hz: f64,
    /// Write `bus_voltage.svg` and `currents.svg` next to the trace.
    pub plots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            trace_path: "trace.csv".into(),
            decimation_hz: 1000.0,
            plots: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub plant: PlantParams,
    pub battery: BatteryModel,
    pub ultracap: UltracapModel,
    pub controller: ControllerConfig,
    pub load: LoadProfile,
    pub integration: IntegrationConfig,
    pub output: OutputConfig,
}

impl Config {
    pub fn sim(&self) -> SimConfig {
        SimConfig {
            plant: self.plant.clone(),
            battery: self.battery.clone(),
            ultracap: self.ultracap.clone(),
            controller: self.controller.clone(),
            load: self.load.clone(),
            integration: self.integration,
            decimation_hz: self.output.decimation_hz,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.output.trace_path.trim().is_empty() {
            return Err(ConfigError::schema("output.trace_path", "must not be empty"));
        }
        self.sim().validate()
    }

    /// Canonical JSON: every field present, fixed key order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config always serializes")
    }

    /// SHA-256 of the canonical JSON, lowercase hex.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config always serializes")
    }
}

fn data_error(err: serde_path_to_error::Error<serde_json::Error>) -> ConfigError {
    let mut path = err.path().to_string();
    if path == "." {
        path.clear();
    }
    let message = err.inner().to_string();
    let message = match message.split_once(" at line ") {
        Some((head, _)) => head.to_string(),
        None => message,
    };
    ConfigError::schema(path, message)
}

/// Parses and validates JSON text. `origin` only labels error messages.
pub fn parse_str(text: &str, origin: &Path) -> Result<Config, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: Config = match serde_path_to_error::deserialize(&mut de) {
        Ok(c) => c,
        Err(e) if e.inner().is_data() => return Err(data_error(e).into()),
        Err(e) => {
            return Err(CliError::Malformed {
                path: origin.to_path_buf(),
                message: e.into_inner().to_string(),
            })
        }
    };
    de.end().map_err(|e| CliError::Malformed {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, parses and validates a config file.
pub fn parse_config(path: &Path) -> Result<Config, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_str(&text, path)
}

/// Deserializes an already-parsed JSON value, then validates it.
pub fn from_value(v: Value) -> Result<Config, CliError> {
    let cfg: Config = serde_path_to_error::deserialize(v).map_err(data_error)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Splits `a.b[2].c` into keys and indices.
fn segments(key: &str) -> Option<Vec<Seg<'_>>> {
    let mut out = Vec::new();
    for part in key.split('.') {
        let (name, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if name.is_empty() {
            return None;
        }
        out.push(Seg::Key(name));
        while !rest.is_empty() {
            let close = rest.find(']')?;
            let idx = rest.get(1..close)?.parse().ok()?;
            out.push(Seg::Index(idx));
            rest = &rest[close + 1..];
            if !rest.is_empty() && !rest.starts_with('[') {
                return None;
            }
        }
    }
    Some(out)
}

enum Seg<'a> {
    Key(&'a str),
    Index(usize),
}

/// Replaces the value at a dotted key path. The key must already exist, so
/// pass a fully expanded config (see [`Config::to_value`]).
pub fn set_path(root: &mut Value, key: &str, new: Value) -> Result<(), ConfigError> {
    let segs = segments(key).ok_or_else(|| ConfigError::schema(key, "not a valid key path"))?;
    let mut cur = root;
    for seg in segs {
        cur = match seg {
            Seg::Key(k) => cur.as_object_mut().and_then(|m| m.get_mut(k)),
            Seg::Index(i) => cur.as_array_mut().and_then(|a| a.get_mut(i)),
        }
        .ok_or_else(|| ConfigError::schema(key, "no such key in the configuration"))?;
    }
    *cur = new;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn set_path_walks_keys_and_indices() {
        let mut v = Config::default().to_value();
        set_path(&mut v, "load.phase_b.i_high", json!(25.0)).unwrap();
        assert_eq!(v["load"]["phase_b"]["i_high"], json!(25.0));
        set_path(&mut v, "controller.flc.bus_voltage.sets[2].label", json!("Fine")).unwrap();
        assert_eq!(v["controller"]["flc"]["bus_voltage"]["sets"][2]["label"], json!("Fine"));
    }

    #[test]
    fn set_path_rejects_missing_keys() {
        let mut v = Config::default().to_value();
        assert_eq!(set_path(&mut v, "load.nope", json!(1)).unwrap_err().path, "load.nope");
        assert!(set_path(&mut v, "load..t_end", json!(1)).is_err());
        assert!(set_path(&mut v, "controller.flc.bus_voltage.sets[99]", json!(1)).is_err());
        assert!(set_path(&mut v, "controller.flc.bus_voltage.sets[x]", json!(1)).is_err());
    }
}
