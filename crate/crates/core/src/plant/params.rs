use alloc::format;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, SimFault};

fn positive(path: &str, key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::schema(format!("{path}.{key}"), "must be a positive finite number"))
    }
}

/// Converter component values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantParams {
    /// H
    pub inductance: f64,
    /// Inductor series resistance, ohm.
    pub esr_l: f64,
    /// Battery-side capacitor, F.
    pub c1: f64,
    /// Bus-side capacitor, F.
    pub c2: f64,
    /// Switch on-resistance, ohm.
    pub r_on: f64,
    /// PWM frequency, Hz.
    pub f_sw: f64,
    /// Use the idealized lossless equations, with their original sign
    /// conventions. Only [`derivatives`](super::derivatives) honors this; runs
    /// reject it.
    pub textbook_mode: bool,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            inductance: 3.4e-3,
            esr_l: 1.5e-3,
            c1: 5e-3,
            c2: 5e-3,
            r_on: 0.1,
            f_sw: 40e3,
            textbook_mode: false,
        }
    }
}

impl PlantParams {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        positive(path, "inductance", self.inductance)?;
        positive(path, "esr_l", self.esr_l)?;
        positive(path, "c1", self.c1)?;
        positive(path, "c2", self.c2)?;
        positive(path, "r_on", self.r_on)?;
        positive(path, "f_sw", self.f_sw)?;
        if self.f_sw < 1e3 {
            return Err(ConfigError::schema(format!("{path}.f_sw"), "must be at least 1 kHz"));
        }
        Ok(())
    }

    /// Series resistance in the inductor path. Zero in textbook mode.
    pub fn path_resistance(&self) -> f64 {
        if self.textbook_mode {
            0.0
        } else {
            self.esr_l + self.r_on
        }
    }

    pub fn pwm_period(&self) -> f64 {
        1.0 / self.f_sw
    }
}

/// Lithium-ion pack: Shepherd-form open-circuit voltage over extracted charge,
/// a series resistance, and coulomb counting.
///
/// `v_oc(q) = e0 - k * Q / (Q - q) + a * exp(-b * q)` with `Q` the capacity
/// and `q` the extracted charge, both in Ah. The defaults put `v_oc` at 42 V
/// full, 36.003 V at half charge and 30 V at 10 % state of charge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BatteryModel {
    pub v_nom: f64,
    pub capacity_ah: f64,
    pub soc0: f64,
    /// ohm
    pub r_int: f64,
    /// V
    pub e0: f64,
    /// Polarization voltage, V.
    pub k: f64,
    /// Exponential-zone amplitude, V.
    pub a: f64,
    /// Exponential-zone inverse charge, 1/Ah.
    pub b: f64,
}

impl Default for BatteryModel {
    fn default() -> Self {
        Self {
            v_nom: 36.0,
            capacity_ah: 15.0,
            soc0: 0.5,
            r_int: 0.05,
            e0: 37.5,
            k: 0.75,
            a: 5.25,
            b: 1.0,
        }
    }
}

impl BatteryModel {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        positive(path, "v_nom", self.v_nom)?;
        positive(path, "capacity_ah", self.capacity_ah)?;
        positive(path, "r_int", self.r_int)?;
        positive(path, "e0", self.e0)?;
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(ConfigError::schema(format!("{path}.k"), "must be non-negative"));
        }
        if !(self.a.is_finite() && self.b.is_finite() && self.b >= 0.0) {
            return Err(ConfigError::schema(format!("{path}.b"), "must be non-negative"));
        }
        if !(self.soc0 > 0.0 && self.soc0 < 1.0) {
            return Err(ConfigError::schema(format!("{path}.soc0"), "must lie in (0, 1)"));
        }
        let v = self.open_circuit(self.extracted_at(self.soc0));
        if v.is_nan() || v <= 0.0 {
            return Err(ConfigError::invariant(
                format!("{path}.e0"),
                "open-circuit voltage at soc0 is not positive",
            ));
        }
        Ok(())
    }

    pub fn extracted_at(&self, soc: f64) -> f64 {
        (1.0 - soc) * self.capacity_ah
    }

    pub fn soc(&self, q_extracted: f64) -> f64 {
        1.0 - q_extracted / self.capacity_ah
    }

    /// Open-circuit voltage with no bounds check.
    pub fn open_circuit(&self, q_extracted: f64) -> f64 {
        let cap = self.capacity_ah;
        self.e0 - self.k * cap / (cap - q_extracted) + self.a * libm::exp(-self.b * q_extracted)
    }
}

/// Terminal voltage for a current `i` (positive discharging).
pub fn battery_terminal(m: &BatteryModel, q_extracted: f64, i: f64) -> Result<f64, SimFault> {
    if !(q_extracted >= 0.0 && q_extracted < m.capacity_ah) {
        return Err(SimFault::BatteryBounds {
            t: f64::NAN,
            soc: m.soc(q_extracted),
        });
    }
    Ok(m.open_circuit(q_extracted) - m.r_int * i)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UltracapModel {
    /// F
    pub capacitance: f64,
    /// ohm
    pub esr: f64,
    /// Initial internal voltage, V.
    pub v0: f64,
}

impl Default for UltracapModel {
    fn default() -> Self {
        Self {
            capacitance: 29.0,
            esr: 0.044,
            v0: 24.0,
        }
    }
}

impl UltracapModel {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        positive(path, "capacitance", self.capacitance)?;
        positive(path, "esr", self.esr)?;
        if !(self.v0.is_finite() && self.v0 >= 0.0) {
            return Err(ConfigError::schema(format!("{path}.v0"), "must be non-negative"));
        }
        Ok(())
    }

    /// Internal voltage slope for a sourcing current `i`.
    pub fn internal_slope(&self, i: f64) -> f64 {
        -i / self.capacitance
    }
}

/// Terminal voltage for a sourcing current `i`.
pub fn ultracap_terminal(m: &UltracapModel, v_uc: f64, i: f64) -> f64 {
    v_uc - m.esr * i
}
