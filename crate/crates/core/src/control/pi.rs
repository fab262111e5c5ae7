use serde::{Deserialize, Serialize};

/// Proportional-integral gains with output clamp bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PIGains {
    pub kp: f64,
    /// 1/s
    pub ki: f64,
    pub out_lo: f64,
    pub out_hi: f64,
}

impl PIGains {
    pub fn with_bounds(self, out_lo: f64, out_hi: f64) -> Self {
        Self { out_lo, out_hi, ..self }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PIState {
    /// Accumulated error times seconds.
    pub integral: f64,
    pub last_output: f64,
}

/// Forward-Euler PI step with conditional anti-windup.
///
/// The integral first absorbs `error * dt`; if the resulting output would
/// saturate and the error pushes further into that bound, integration stops
/// where the output meets the bound. The integral is also kept inside the band where
/// `ki * integral` alone stays within the output bounds.
pub fn pi_update(g: &PIGains, st: PIState, error: f64, dt: f64) -> (f64, PIState) {
    let mut integral = st.integral + error * dt;
    let raw = g.kp * error + g.ki * integral;
    if g.ki > 0.0 {
        // integrate only as far as the bound, never past it
        if raw > g.out_hi && error > 0.0 {
            integral = integral.min((g.out_hi - g.kp * error) / g.ki).max(st.integral);
        } else if raw < g.out_lo && error < 0.0 {
            integral = integral.max((g.out_lo - g.kp * error) / g.ki).min(st.integral);
        }
    }
    if g.ki > 0.0 {
        integral = integral.clamp(g.out_lo / g.ki, g.out_hi / g.ki);
    }
    let output = (g.kp * error + g.ki * integral).clamp(g.out_lo, g.out_hi);
    (
        output,
        PIState {
            integral,
            last_output: output,
        },
    )
}

/// Gain pair as written in a configuration file; bounds are supplied by the
/// loop that owns the controller.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiConfig {
    pub kp: f64,
    pub ki: f64,
}

impl PiConfig {
    pub fn gains(&self, out_lo: f64, out_hi: f64) -> PIGains {
        PIGains {
            kp: self.kp,
            ki: self.ki,
            out_lo,
            out_hi,
        }
    }
}
