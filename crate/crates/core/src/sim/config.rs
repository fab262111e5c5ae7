use alloc::format;
use serde::{Deserialize, Serialize};

use super::profile::LoadProfile;
use crate::control::{CascadeConfig, CascadeGains, IfThenConfig, IfThenController, Supervisor};
use crate::error::ConfigError;
use crate::fuzzy::{FuzzyController, FuzzyControllerDef};
use crate::plant::{BatteryModel, PlantParams, UltracapModel};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupervisorKind {
    #[default]
    Flc,
    Ifthen,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    pub kind: SupervisorKind,
    /// Bus voltage setpoint, V.
    pub v_ref: f64,
    /// A
    pub dead_band: f64,
    /// A
    pub i_batt_max: f64,
    /// Supervisor evaluation rate, Hz.
    pub supervisor_hz: f64,
    pub flc: FuzzyControllerDef,
    pub ifthen: IfThenConfig,
    pub pi: CascadeGains,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        let c = CascadeConfig::default();
        Self {
            kind: SupervisorKind::Flc,
            v_ref: c.v_ref,
            dead_band: c.dead_band,
            i_batt_max: c.i_batt_max,
            supervisor_hz: 1000.0,
            flc: FuzzyControllerDef::default(),
            ifthen: IfThenConfig::default(),
            pi: c.gains,
        }
    }
}

impl ControllerConfig {
    pub fn cascade(&self) -> CascadeConfig {
        CascadeConfig {
            v_ref: self.v_ref,
            dead_band: self.dead_band,
            i_batt_max: self.i_batt_max,
            gains: self.pi,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Switched,
    #[default]
    Averaged,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationConfig {
    pub mode: Mode,
    /// Fixed step, s. Defaults to 1 µs when switched and 50 µs when averaged.
    pub dt: Option<f64>,
}

impl IntegrationConfig {
    pub fn step(&self) -> f64 {
        self.dt.unwrap_or(match self.mode {
            Mode::Switched => 1e-6,
            Mode::Averaged => 50e-6,
        })
    }
}

/// Everything a run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub plant: PlantParams,
    pub battery: BatteryModel,
    pub ultracap: UltracapModel,
    pub controller: ControllerConfig,
    pub load: LoadProfile,
    pub integration: IntegrationConfig,
    /// Trace sampling rate, Hz.
    pub decimation_hz: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            plant: PlantParams::default(),
            battery: BatteryModel::default(),
            ultracap: UltracapModel::default(),
            controller: ControllerConfig::default(),
            load: LoadProfile::default(),
            integration: IntegrationConfig::default(),
            decimation_hz: 1000.0,
        }
    }
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::schema(path, "must be a positive number"))
    }
}

impl SimConfig {
    /// Checks every field, naming the offending one by its dotted path.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.plant.validate("plant")?;
        if self.plant.textbook_mode {
            return Err(ConfigError::invariant(
                "plant.textbook_mode",
                "textbook mode is for equation checks only and cannot drive a closed-loop run",
            ));
        }
        self.battery.validate("battery")?;
        self.ultracap.validate("ultracap")?;
        self.load.validate("load")?;

        let c = &self.controller;
        self.controller.cascade().validate("controller")?;
        positive("controller.supervisor_hz", c.supervisor_hz)?;
        c.ifthen.validate("controller.ifthen")?;
        FuzzyController::at_path(c.flc.clone(), "controller.flc")?;

        let dt = self.integration.step();
        positive("integration.dt", dt)?;
        if self.integration.mode == Mode::Switched && dt > 0.1 * self.plant.pwm_period() {
            return Err(ConfigError::invariant(
                "integration.dt",
                format!("switched mode needs at least 10 steps per PWM period ({} s)", self.plant.pwm_period()),
            ));
        }
        if dt >= self.load.t_end {
            return Err(ConfigError::invariant("integration.dt", "step is longer than the run"));
        }
        if 1.0 / c.supervisor_hz < dt {
            return Err(ConfigError::invariant("controller.supervisor_hz", "supervisor period is shorter than the step"));
        }
        positive("output.decimation_hz", self.decimation_hz)?;
        if 1.0 / self.decimation_hz < dt {
            return Err(ConfigError::invariant("output.decimation_hz", "sample period is shorter than the step"));
        }
        Ok(())
    }

    pub fn supervisor(&self) -> Result<Supervisor, ConfigError> {
        let c = &self.controller;
        Ok(match c.kind {
            SupervisorKind::Flc => Supervisor::Fuzzy(FuzzyController::at_path(c.flc.clone(), "controller.flc")?),
            SupervisorKind::Ifthen => Supervisor::IfThen(IfThenController::new(c.ifthen.clone())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn step_defaults_follow_mode() {
        let mut i = IntegrationConfig::default();
        assert_eq!(i.step(), 50e-6);
        i.mode = Mode::Switched;
        assert_eq!(i.step(), 1e-6);
        i.dt = Some(2e-6);
        assert_eq!(i.step(), 2e-6);
    }

    #[test]
    fn error_paths() {
        let mut c = SimConfig::default();
        c.plant.f_sw = -1.0;
        assert_eq!(c.validate().unwrap_err().path, "plant.f_sw");

        let mut c = SimConfig::default();
        c.plant.textbook_mode = true;
        assert_eq!(c.validate().unwrap_err().path, "plant.textbook_mode");

        let mut c = SimConfig::default();
        c.integration.mode = Mode::Switched;
        c.integration.dt = Some(50e-6);
        assert_eq!(c.validate().unwrap_err().path, "integration.dt");

        let mut c = SimConfig::default();
        c.controller.ifthen.v_low = 30.0;
        assert_eq!(c.validate().unwrap_err().path, "controller.ifthen.v_low");

        let mut c = SimConfig::default();
        c.controller.flc.rules.matrix[0][0] = "Nope".into();
        assert!(c.validate().unwrap_err().path.starts_with("controller.flc.rules"));
    }
}
