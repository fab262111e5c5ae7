use alloc::format;
use serde::{Deserialize, Serialize};

use super::SupervisorOutput;
use crate::error::ConfigError;

/// Hysteresis thresholds and fixed currents for the baseline controller.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IfThenConfig {
    /// Start discharging below this bus voltage, V.
    pub v_low: f64,
    /// Start recharging above this bus voltage, V.
    pub v_high: f64,
    /// Battery discharge current allowed while discharging, A.
    pub i_discharge: f64,
    /// Battery recharge current magnitude forced while recharging, A.
    pub i_recharge: f64,
}

impl Default for IfThenConfig {
    fn default() -> Self {
        // tuned against the first-half pulse train only
        Self {
            v_low: 23.5,
            v_high: 24.5,
            i_discharge: 12.5,
            i_recharge: 5.0,
        }
    }
}

impl IfThenConfig {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        for (key, v) in [
            ("v_low", self.v_low),
            ("v_high", self.v_high),
            ("i_discharge", self.i_discharge),
            ("i_recharge", self.i_recharge),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::schema(format!("{path}.{key}"), "must be a non-negative number"));
            }
        }
        if self.v_low >= self.v_high {
            return Err(ConfigError::invariant(format!("{path}.v_low"), "v_low must be below v_high"));
        }
        Ok(())
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.v_low + self.v_high)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IfThenState {
    #[default]
    Idle,
    Discharging,
    Recharging,
}

impl IfThenState {
    pub fn as_str(self) -> &'static str {
        match self {
            IfThenState::Idle => "idle",
            IfThenState::Discharging => "discharging",
            IfThenState::Recharging => "recharging",
        }
    }
}

/// Three-state hysteretic supervisor driven by bus voltage alone.
#[derive(Clone, Debug, PartialEq)]
pub struct IfThenController {
    pub config: IfThenConfig,
    pub state: IfThenState,
}

impl IfThenController {
    pub fn new(config: IfThenConfig) -> Self {
        Self {
            config,
            state: IfThenState::Idle,
        }
    }

    pub fn supervise(&mut self, v_bus: f64) -> SupervisorOutput {
        if_then_supervise(self, v_bus)
    }
}

pub fn if_then_supervise(c: &mut IfThenController, v_bus: f64) -> SupervisorOutput {
    let cfg = &c.config;
    let mid = cfg.midpoint();
    c.state = if v_bus < cfg.v_low {
        IfThenState::Discharging
    } else if v_bus > cfg.v_high {
        IfThenState::Recharging
    } else {
        match c.state {
            IfThenState::Discharging if v_bus >= mid => IfThenState::Idle,
            IfThenState::Recharging if v_bus <= mid => IfThenState::Idle,
            s => s,
        }
    };
    let limit = match c.state {
        IfThenState::Idle => 0.0,
        IfThenState::Discharging => cfg.i_discharge,
        IfThenState::Recharging => -cfg.i_recharge,
    };
    SupervisorOutput {
        i_batt_limit: limit,
        uncovered_input_flag: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idle_inside_band() {
        let mut c = IfThenController::new(IfThenConfig::default());
        let out = c.supervise(24.0);
        assert_eq!(out.i_batt_limit, 0.0);
        assert_eq!(c.state, IfThenState::Idle);
    }

    #[test]
    fn hysteresis_cycle() {
        let cfg = IfThenConfig::default();
        let mut c = IfThenController::new(cfg.clone());
        assert_eq!(c.supervise(cfg.v_low - 0.1).i_batt_limit, cfg.i_discharge);
        assert_eq!(c.state, IfThenState::Discharging);
        // still discharging until the midpoint is reached
        assert_eq!(c.supervise(cfg.v_low + 0.1).i_batt_limit, cfg.i_discharge);
        assert_eq!(c.supervise(cfg.midpoint()).i_batt_limit, 0.0);
        assert_eq!(c.state, IfThenState::Idle);
        assert_eq!(c.supervise(cfg.v_high + 0.1).i_batt_limit, -cfg.i_recharge);
        assert_eq!(c.supervise(cfg.v_high - 0.1).i_batt_limit, -cfg.i_recharge);
        assert_eq!(c.supervise(cfg.midpoint() - 0.01).i_batt_limit, 0.0);
    }

    #[test]
    fn threshold_order_validated() {
        let cfg = IfThenConfig {
            v_low: 25.0,
            v_high: 24.0,
            ..Default::default()
        };
        let err = cfg.validate("controller.ifthen").unwrap_err();
        assert_eq!(err.path, "controller.ifthen.v_low");
    }
}
