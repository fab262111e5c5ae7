use alloc::format;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, SimFault};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseLevels {
    /// Load current during the high segment, A.
    pub i_high: f64,
    /// Load current during the low segment, A.
    pub i_low: f64,
}

/// Pulse-train load with a step change in amplitude at `t_shift`.
///
/// Each cycle is `t_high` seconds at `i_high` followed by `t_low` seconds at
/// `i_low`. The train restarts at `t_shift`, so a cycle always begins there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadProfile {
    pub t_high: f64,
    pub t_low: f64,
    pub phase_a: PulseLevels,
    pub phase_b: PulseLevels,
    pub t_shift: f64,
    pub t_end: f64,
}

impl Default for LoadProfile {
    fn default() -> Self {
        Self {
            t_high: 5.0,
            t_low: 1.0,
            phase_a: PulseLevels { i_high: 20.0, i_low: 2.0 },
            phase_b: PulseLevels { i_high: 30.0, i_low: 5.0 },
            t_shift: 30.0,
            t_end: 60.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    A,
    B,
}

impl LoadProfile {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        for (key, v) in [("t_high", self.t_high), ("t_low", self.t_low), ("t_shift", self.t_shift), ("t_end", self.t_end)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::schema(format!("{path}.{key}"), "must be a positive number of seconds"));
            }
        }
        for (name, lv) in [("phase_a", &self.phase_a), ("phase_b", &self.phase_b)] {
            for (key, v) in [("i_high", lv.i_high), ("i_low", lv.i_low)] {
                if !v.is_finite() {
                    return Err(ConfigError::schema(format!("{path}.{name}.{key}"), "must be a finite number"));
                }
            }
        }
        if self.t_shift > self.t_end {
            return Err(ConfigError::invariant(format!("{path}.t_shift"), "t_shift must not be after t_end"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        self.t_high + self.t_low
    }

    pub fn phase_at(&self, t: f64) -> Phase {
        if t < self.t_shift {
            Phase::A
        } else {
            Phase::B
        }
    }

    pub fn levels(&self, phase: Phase) -> &PulseLevels {
        match phase {
            Phase::A => &self.phase_a,
            Phase::B => &self.phase_b,
        }
    }

    /// Start and end times of every complete cycle inside `phase`.
    pub fn full_cycles(&self, phase: Phase) -> alloc::vec::Vec<(f64, f64)> {
        let (start, stop) = match phase {
            Phase::A => (0.0, self.t_shift),
            Phase::B => (self.t_shift, self.t_end),
        };
        let p = self.period();
        let tol = 1e-9 * stop.max(1.0);
        let mut out = alloc::vec::Vec::new();
        let mut k = 0u32;
        loop {
            let a = start + f64::from(k) * p;
            let b = a + p;
            if b > stop + tol {
                break;
            }
            out.push((a, b));
            k += 1;
        }
        out
    }
}

/// External disturbance at time `t`: the negated load current.
pub fn load_current(p: &LoadProfile, t: f64) -> Result<f64, SimFault> {
    if !(t >= 0.0 && t <= p.t_end) {
        return Err(SimFault::ProfileQuery { t });
    }
    let phase = p.phase_at(t);
    let origin = if phase == Phase::A { 0.0 } else { p.t_shift };
    let pos = (t - origin) % p.period();
    let lv = p.levels(phase);
    Ok(if pos < p.t_high { -lv.i_high } else { -lv.i_low })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_high() {
        assert_eq!(load_current(&LoadProfile::default(), 0.0).unwrap(), -20.0);
    }

    #[test]
    fn low_segment() {
        assert_eq!(load_current(&LoadProfile::default(), 5.5).unwrap(), -2.0);
        assert_eq!(load_current(&LoadProfile::default(), 5.0).unwrap(), -2.0);
        assert_eq!(load_current(&LoadProfile::default(), 6.0).unwrap(), -20.0);
    }

    #[test]
    fn shift_to_second_phase() {
        let p = LoadProfile::default();
        assert_eq!(load_current(&p, 29.999).unwrap(), -2.0);
        assert_eq!(load_current(&p, 30.0 + 1e-9).unwrap(), -30.0);
        assert_eq!(load_current(&p, 35.5).unwrap(), -5.0);
        assert_eq!(load_current(&p, 60.0).unwrap(), -30.0);
    }

    #[test]
    fn restarts_at_shift_even_off_grid() {
        let p = LoadProfile {
            t_shift: 31.5,
            ..Default::default()
        };
        assert_eq!(load_current(&p, 31.4).unwrap(), -20.0);
        assert_eq!(load_current(&p, 31.5).unwrap(), -30.0);
        assert_eq!(load_current(&p, 36.6).unwrap(), -5.0);
    }

    #[test]
    fn out_of_range_is_a_fault() {
        let p = LoadProfile::default();
        assert!(matches!(load_current(&p, -0.1), Err(SimFault::ProfileQuery { .. })));
        assert!(matches!(load_current(&p, 60.5), Err(SimFault::ProfileQuery { .. })));
        assert!(load_current(&p, f64::NAN).is_err());
    }

    #[test]
    fn cycles_per_phase() {
        let p = LoadProfile::default();
        let a = p.full_cycles(Phase::A);
        let b = p.full_cycles(Phase::B);
        assert_eq!(a.len(), 5);
        assert_eq!(b.len(), 5);
        assert_eq!(a[4], (24.0, 30.0));
        assert_eq!(b[0], (30.0, 36.0));
    }

    #[test]
    fn shift_must_not_follow_end() {
        let p = LoadProfile {
            t_shift: 61.0,
            ..Default::default()
        };
        assert_eq!(p.validate("load").unwrap_err().path, "load.t_shift");
        // a shift at the very end just leaves phase b empty
        let p = LoadProfile {
            t_shift: 60.0,
            ..Default::default()
        };
        assert!(p.validate("load").is_ok());
        assert!(p.full_cycles(Phase::B).is_empty());
    }
}
