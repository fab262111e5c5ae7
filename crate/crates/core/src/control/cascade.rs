use alloc::format;
use serde::{Deserialize, Serialize};

use super::pi::{pi_update, PIState, PiConfig};
use super::SupervisorOutput;
use crate::error::ConfigError;
use crate::plant::{Direction, DutyCommand};

/// Voltage and current loop gains for one direction of power flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopGains {
    pub voltage: PiConfig,
    pub current: PiConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CascadeGains {
    pub discharge: LoopGains,
    pub recharge: LoopGains,
}

impl Default for CascadeGains {
    fn default() -> Self {
        Self {
            discharge: LoopGains {
                voltage: PiConfig { kp: 0.2, ki: 10.0 },
                current: PiConfig { kp: 1.0, ki: 200.0 },
            },
            recharge: LoopGains {
                voltage: PiConfig { kp: 0.028, ki: 1.5 },
                current: PiConfig { kp: 5.0, ki: 1.0 },
            },
        }
    }
}

/// Setpoint and limits of the cascaded loops.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeConfig {
    /// Bus voltage setpoint, V.
    pub v_ref: f64,
    /// Direction-change dead band on the battery current reference, A.
    pub dead_band: f64,
    /// Hard bound on the battery current reference in either direction, A.
    /// Also the base of the voltage loop's per-unit output.
    pub i_batt_max: f64,
    pub gains: CascadeGains,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            v_ref: 24.0,
            dead_band: 0.5,
            i_batt_max: 30.0,
            gains: CascadeGains::default(),
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        let positive = [
            ("v_ref", self.v_ref),
            ("i_batt_max", self.i_batt_max),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::schema(format!("{path}.{key}"), "must be a positive number"));
            }
        }
        if !(self.dead_band.is_finite() && self.dead_band >= 0.0) {
            return Err(ConfigError::schema(format!("{path}.dead_band"), "must be a non-negative number"));
        }
        let g = &self.gains;
        for (side, lg) in [("discharge", &g.discharge), ("recharge", &g.recharge)] {
            for (lp, pi) in [("voltage", &lg.voltage), ("current", &lg.current)] {
                for (key, v) in [("kp", pi.kp), ("ki", pi.ki)] {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(ConfigError::schema(
                            format!("{path}.pi.{side}.{lp}.{key}"),
                            "must be a non-negative number",
                        ));
                    }
                }
                if pi.kp == 0.0 && pi.ki == 0.0 {
                    return Err(ConfigError::invariant(
                        format!("{path}.pi.{side}.{lp}"),
                        "kp and ki cannot both be zero",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Measurements the cascade acts on.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Measured {
    pub v_bus: f64,
    pub v_c1: f64,
    pub i_l: f64,
    pub i_batt: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CascadeOutput {
    pub duty: DutyCommand,
    /// Battery current reference after the supervisor clamp, A.
    pub i_batt_ref: f64,
    pub direction: Direction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Discharge,
    Recharge,
}

/// Supervisor-limited cascaded PI loops. One voltage/current pair per
/// direction; only the pair of the active side is advanced.
#[derive(Clone, Debug, PartialEq)]
pub struct ControllerStack {
    pub config: CascadeConfig,
    direction: Direction,
    side: Side,
    voltage: PIState,
    current: PIState,
}

impl ControllerStack {
    pub fn new(config: CascadeConfig) -> Self {
        Self {
            config,
            direction: Direction::Idle,
            side: Side::Discharge,
            voltage: PIState::default(),
            current: PIState::default(),
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    fn gains(&self, side: Side) -> &LoopGains {
        match side {
            Side::Discharge => &self.config.gains.discharge,
            Side::Recharge => &self.config.gains.recharge,
        }
    }
}

/// Next converter direction given the clamped battery current reference.
///
/// Leaving a direction toward idle happens once the reference reaches zero;
/// entering a direction needs the reference beyond the dead band. A reversal
/// therefore always crosses the full band.
pub fn select_direction(prev: Direction, i_ref: f64, dead_band: f64) -> Direction {
    match prev {
        Direction::Idle if i_ref > dead_band => Direction::Discharge,
        Direction::Idle if i_ref < -dead_band => Direction::Recharge,
        Direction::Idle => Direction::Idle,
        Direction::Discharge if i_ref < -dead_band => Direction::Recharge,
        Direction::Discharge if i_ref <= 0.0 => Direction::Idle,
        Direction::Discharge => Direction::Discharge,
        Direction::Recharge if i_ref > dead_band => Direction::Discharge,
        Direction::Recharge if i_ref >= 0.0 => Direction::Idle,
        Direction::Recharge => Direction::Recharge,
    }
}

/// Range the voltage loop's output may occupy under a supervisor limit.
pub fn reference_bounds(limit: f64, i_batt_max: f64) -> (f64, f64) {
    if limit > 0.0 {
        let m = limit.min(i_batt_max);
        (-m, m)
    } else if limit < 0.0 {
        let m = limit.max(-i_batt_max);
        (m, m)
    } else {
        (0.0, 0.0)
    }
}

/// One control update.
///
/// The voltage loop turns the bus error into a battery current reference
/// expressed per unit of `i_batt_max`. The reference is confined by the
/// supervisor limit: a positive limit bounds its magnitude, zero forces it
/// to zero, a negative limit replaces it. While the limit is not positive
/// the voltage loop is bypassed and keeps its state. The current loop tracks the matching inductor current with an inductor-voltage
/// command that is converted to the duty of the active switch using the
/// measured bus and battery-side voltages as feedforward.
pub fn cascade_update(stack: &mut ControllerStack, m: &Measured, limit: &SupervisorOutput, dt: f64) -> CascadeOutput {
    let cfg = &stack.config;
    let err_v = cfg.v_ref - m.v_bus;

    let side = match stack.direction {
        Direction::Discharge => Side::Discharge,
        Direction::Recharge => Side::Recharge,
        Direction::Idle if limit.i_batt_limit < 0.0 => Side::Recharge,
        Direction::Idle if err_v >= 0.0 => Side::Discharge,
        Direction::Idle => Side::Recharge,
    };
    if side != stack.side {
        // keep the integral term's contribution across the gain change
        let old_ki = stack.gains(stack.side).voltage.ki;
        let new_ki = stack.gains(side).voltage.ki;
        stack.voltage.integral = if new_ki > 0.0 { stack.voltage.integral * old_ki / new_ki } else { 0.0 };
        stack.side = side;
    }

    let (lo, hi) = reference_bounds(limit.i_batt_limit, cfg.i_batt_max);
    let i_ref = if limit.i_batt_limit > 0.0 {
        let base = cfg.i_batt_max;
        let vg = stack.gains(side).voltage.gains(lo / base, hi / base);
        let (ref_pu, vst) = pi_update(&vg, stack.voltage, err_v, dt);
        stack.voltage = vst;
        ref_pu * base
    } else {
        // the supervisor overrides the voltage loop, which holds its state
        lo
    };

    let next = select_direction(stack.direction, i_ref, cfg.dead_band);
    if next != stack.direction {
        stack.current = PIState::default();
        stack.direction = next;
    }
    let duty = match next {
        Direction::Idle => DutyCommand::OFF,
        dir => {
            let v_bus = m.v_bus.max(1.0);
            let v_c1 = m.v_c1.max(1.0);
            let il_ref = i_ref * v_c1 / v_bus;
            let cg = stack.gains(side).current.gains(-v_bus, v_c1 - v_bus);
            let (v_cmd, cst) = pi_update(&cg, stack.current, il_ref - m.i_l, dt);
            stack.current = cst;
            let q = ((v_bus + v_cmd) / v_c1).clamp(0.0, 1.0);
            if dir == Direction::Discharge {
                DutyCommand::discharge(q)
            } else {
                DutyCommand::recharge(1.0 - q)
            }
        }
    };
    CascadeOutput {
        duty,
        i_batt_ref: i_ref,
        direction: next,
    }
}
