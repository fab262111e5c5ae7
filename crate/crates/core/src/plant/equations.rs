use serde::{Deserialize, Serialize};

use super::params::PlantParams;
use crate::error::SimFault;

/// Direction of power flow through the converter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// No active switching; only diode conduction.
    #[default]
    Idle,
    /// Battery toward bus (switch S1 modulated).
    Discharge,
    /// Bus toward battery (switch S2 modulated).
    Recharge,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Idle => "idle",
            Direction::Discharge => "discharge",
            Direction::Recharge => "recharge",
        }
    }
}

/// Instantaneous switch pattern plus the flow direction it belongs to, which
/// decides which freewheel path conducts when both switches are off.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwitchCommand {
    pub s1: bool,
    pub s2: bool,
    pub direction: Direction,
}

impl SwitchCommand {
    pub fn check(&self, t: f64) -> Result<(), SimFault> {
        if self.s1 && self.s2 {
            Err(SimFault::ShootThrough { t })
        } else {
            Ok(())
        }
    }
}

/// Duty fractions for the averaged model. At most one may be non-zero.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DutyCommand {
    pub d1: f64,
    pub d2: f64,
}

impl DutyCommand {
    pub const OFF: Self = Self { d1: 0.0, d2: 0.0 };

    pub fn discharge(d: f64) -> Self {
        Self { d1: d, d2: 0.0 }
    }

    pub fn recharge(d: f64) -> Self {
        Self { d1: 0.0, d2: d }
    }

    pub fn check(&self, t: f64) -> Result<(), SimFault> {
        let in_range = |d: f64| (0.0..=1.0).contains(&d);
        if !in_range(self.d1) || !in_range(self.d2) || (self.d1 > 0.0 && self.d2 > 0.0) {
            Err(SimFault::ShootThrough { t })
        } else {
            Ok(())
        }
    }

    pub fn direction(&self) -> Direction {
        if self.d1 > 0.0 {
            Direction::Discharge
        } else if self.d2 > 0.0 {
            Direction::Recharge
        } else {
            Direction::Idle
        }
    }

    /// Duty of the switch that is active in [`direction`](Self::direction).
    pub fn active(&self) -> f64 {
        self.d1.max(self.d2)
    }
}

/// Branch currents entering the converter's capacitor nodes.
///
/// Outside textbook mode: `i_v1` is the battery current into C1 and `i_v2` the
/// ultracapacitor current into the bus, both positive when the device
/// sources. `zeta` is generation minus load, positive when it injects into
/// the bus.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PortCurrents {
    pub i_v1: f64,
    pub i_v2: f64,
    pub zeta: f64,
}

/// Converter electrical state used by the equations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConverterState {
    pub i_l: f64,
    pub v_c1: f64,
    pub v_c2: f64,
}

/// Time derivatives of `(i_L, v_C1, v_C2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Derivatives {
    pub di_l: f64,
    pub dv_c1: f64,
    pub dv_c2: f64,
    /// The freewheel path refused to carry current against the active
    /// direction; `di_l` was forced to zero.
    pub blocked: bool,
}

impl Derivatives {
    fn lerp(a: Self, b: Self, w: f64) -> Self {
        Self {
            di_l: w * a.di_l + (1.0 - w) * b.di_l,
            dv_c1: w * a.dv_c1 + (1.0 - w) * b.dv_c1,
            dv_c2: w * a.dv_c2 + (1.0 - w) * b.dv_c2,
            blocked: false,
        }
    }
}

/// The four switching states of the converter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwitchState {
    /// S1 on, discharging.
    One,
    /// Both off, discharging.
    Two,
    /// S2 on, recharging.
    Three,
    /// Both off, recharging.
    Four,
}

impl SwitchState {
    pub fn from_command(sw: SwitchCommand, t: f64) -> Result<Self, SimFault> {
        sw.check(t)?;
        match (sw.s1, sw.s2, sw.direction) {
            (true, false, Direction::Discharge) => Ok(SwitchState::One),
            (false, false, Direction::Discharge) => Ok(SwitchState::Two),
            (false, true, Direction::Recharge) => Ok(SwitchState::Three),
            (false, false, Direction::Recharge) => Ok(SwitchState::Four),
            _ => Err(SwitchState::invalid(t)),
        }
    }

    fn invalid(t: f64) -> SimFault {
        SimFault::InvalidSwitchState { t }
    }
}

/// Lossless four-state equations in their idealized form, sign conventions
/// included (current references flip between the two flow directions, and the
/// disturbance enters every bus equation with a minus sign).
pub fn textbook_derivatives(p: &PlantParams, s: &ConverterState, state: SwitchState, ports: &PortCurrents) -> Derivatives {
    let ConverterState { i_l, v_c1, v_c2 } = *s;
    let PortCurrents { i_v1, i_v2, zeta } = *ports;
    let (l_v, c1_i, c2_i) = match state {
        SwitchState::One => (v_c1 - v_c2, i_l - i_v1, i_l - i_v2 - zeta),
        SwitchState::Two => (-v_c2, -i_v1, i_l - i_v2 - zeta),
        SwitchState::Three => (v_c2, -i_v1, i_v2 - i_l - zeta),
        SwitchState::Four => (v_c2 - v_c1, i_l - i_v1, i_v2 - i_l - zeta),
    };
    Derivatives {
        di_l: l_v / p.inductance,
        dv_c1: c1_i / p.c1,
        dv_c2: c2_i / p.c2,
        blocked: false,
    }
}

// Returns (switching-node fraction q, di_L/dt, blocked).
fn lossy_node(p: &PlantParams, s: &ConverterState, sw: SwitchCommand) -> (f64, f64, bool) {
    let r = p.path_resistance();
    let ConverterState { i_l, v_c1, v_c2 } = *s;
    let slope = |q: f64| (q * v_c1 - v_c2 - r * i_l) / p.inductance;
    if sw.s1 {
        return (1.0, slope(1.0), false);
    }
    if sw.s2 {
        return (0.0, slope(0.0), false);
    }
    let lower = |q: f64, di: f64| {
        // lower diode: current may only flow toward the bus
        if i_l <= 0.0 && di < 0.0 {
            (q, 0.0, true)
        } else {
            (q, di, false)
        }
    };
    let upper = |q: f64, di: f64| {
        // upper diode: current may only flow toward the battery
        if i_l >= 0.0 && di > 0.0 {
            (q, 0.0, true)
        } else {
            (q, di, false)
        }
    };
    match sw.direction {
        Direction::Discharge => lower(0.0, slope(0.0)),
        Direction::Recharge => upper(1.0, slope(1.0)),
        Direction::Idle => {
            if i_l > 0.0 {
                lower(0.0, slope(0.0))
            } else if i_l < 0.0 {
                upper(1.0, slope(1.0))
            } else {
                let di = slope(1.0);
                if di < 0.0 {
                    (1.0, di, false)
                } else {
                    (0.0, 0.0, true)
                }
            }
        }
    }
}

fn assemble(p: &PlantParams, s: &ConverterState, ports: &PortCurrents, q: f64, di_l: f64, blocked: bool) -> Derivatives {
    let i_l = if blocked { 0.0 } else { s.i_l };
    Derivatives {
        di_l,
        dv_c1: (ports.i_v1 - q * i_l) / p.c1,
        dv_c2: (i_l + ports.i_v2 + ports.zeta) / p.c2,
        blocked,
    }
}

/// Time derivatives of the converter state for an instantaneous switch
/// pattern. Shoot-through is rejected, never clamped.
///
/// In textbook mode this is [`textbook_derivatives`] for the matching
/// switching state. Otherwise the lossy model applies:
///
/// `i_L` is positive from the battery side toward the bus. The switching node
/// sits at `q * v_C1`, where `q` is 1 while S1 (or, recharging, the upper
/// freewheel diode) conducts and 0 while S2 (or the lower diode) conducts:
///
/// ```text
/// L  di_L/dt  = q v_C1 - v_C2 - (esr_L + r_on) i_L
/// C1 dv_C1/dt = i_V1 - q i_L
/// C2 dv_C2/dt = i_L + i_V2 + zeta
/// ```
///
/// With both switches off a diode only conducts in its forward direction;
/// once `i_L` reaches zero against the active direction it is held there and
/// the result is marked `blocked`.
pub fn derivatives(p: &PlantParams, s: &ConverterState, sw: SwitchCommand, ports: &PortCurrents) -> Result<Derivatives, SimFault> {
    sw.check(f64::NAN)?;
    if p.textbook_mode {
        let state = SwitchState::from_command(sw, f64::NAN)?;
        return Ok(textbook_derivatives(p, s, state, ports));
    }
    let (q, di, blocked) = lossy_node(p, s, sw);
    Ok(assemble(p, s, ports, q, di, blocked))
}

/// Duty-weighted combination of the active pair of switching states.
pub fn averaged_derivatives(p: &PlantParams, s: &ConverterState, duty: DutyCommand, ports: &PortCurrents) -> Result<Derivatives, SimFault> {
    duty.check(f64::NAN)?;
    let direction = duty.direction();
    let d = duty.active();
    if p.textbook_mode {
        let (on, off) = match direction {
            Direction::Recharge => (SwitchState::Three, SwitchState::Four),
            _ => (SwitchState::One, SwitchState::Two),
        };
        let a = textbook_derivatives(p, s, on, ports);
        let b = textbook_derivatives(p, s, off, ports);
        return Ok(Derivatives::lerp(a, b, d));
    }
    if direction == Direction::Idle {
        return derivatives(
            p,
            s,
            SwitchCommand {
                s1: false,
                s2: false,
                direction,
            },
            ports,
        );
    }
    // The lossy model is affine in q, so the convex combination of the on and
    // off states equals the model evaluated at the averaged node fraction.
    let q = match direction {
        Direction::Recharge => 1.0 - d,
        _ => d,
    };
    let r = p.path_resistance();
    let mut di = (q * s.v_c1 - s.v_c2 - r * s.i_l) / p.inductance;
    let blocked = match direction {
        Direction::Discharge => s.i_l <= 0.0 && di < 0.0,
        _ => s.i_l >= 0.0 && di > 0.0,
    };
    if blocked {
        di = 0.0;
    }
    Ok(assemble(p, s, ports, q, di, blocked))
}
