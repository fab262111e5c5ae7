use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipKind {
    Triangular,
    Trapezoidal,
}

/// Piecewise-linear membership function.
///
/// Triangular sets carry `[a, b, c]`, trapezoidal sets `[a, b, c, d]`, all in
/// the units of the owning variable. Coincident breakpoints are allowed and
/// behave as step edges with the full degree at the coincident point, which is
/// how the shoulder sets at the universe extremes are written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembershipFunction {
    pub kind: MembershipKind,
    pub points: Vec<f64>,
}

impl MembershipFunction {
    pub fn triangular(a: f64, b: f64, c: f64) -> Self {
        Self {
            kind: MembershipKind::Triangular,
            points: alloc::vec![a, b, c],
        }
    }

    pub fn trapezoidal(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self {
            kind: MembershipKind::Trapezoidal,
            points: alloc::vec![a, b, c, d],
        }
    }

    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        let expected = match self.kind {
            MembershipKind::Triangular => 3,
            MembershipKind::Trapezoidal => 4,
        };
        if self.points.len() != expected {
            return Err(ConfigError::schema(
                format!("{path}.points"),
                format!("{:?} set needs {expected} breakpoints, got {}", self.kind, self.points.len()),
            ));
        }
        if self.points.iter().any(|p| !p.is_finite()) {
            return Err(ConfigError::schema(format!("{path}.points"), "breakpoints must be finite"));
        }
        if self.points.windows(2).any(|w| w[1] < w[0]) {
            return Err(ConfigError::schema(
                format!("{path}.points"),
                "breakpoints must be non-decreasing",
            ));
        }
        Ok(())
    }

    /// Breakpoints widened to the trapezoid form `[a, b, c, d]`.
    pub fn corners(&self) -> [f64; 4] {
        let p = &self.points;
        match (self.kind, p.len()) {
            (MembershipKind::Triangular, 3) => [p[0], p[1], p[1], p[2]],
            (MembershipKind::Trapezoidal, 4) => [p[0], p[1], p[2], p[3]],
            // unvalidated input: degrade to whatever span is available
            _ => {
                let lo = p.first().copied().unwrap_or(0.0);
                let hi = p.last().copied().unwrap_or(lo);
                [lo, lo, hi, hi]
            }
        }
    }

    /// Center of the peak (or plateau).
    pub fn peak(&self) -> f64 {
        let [_, b, c, _] = self.corners();
        0.5 * (b + c)
    }

    pub fn support(&self) -> (f64, f64) {
        let [a, _, _, d] = self.corners();
        (a, d)
    }

    /// Degree of membership of `x`, in `[0, 1]`.
    pub fn degree(&self, x: f64) -> f64 {
        trapezoid_degree(self.corners(), x)
    }

    /// True when the set is a triangle mirrored about its peak.
    pub fn is_symmetric_triangle(&self) -> bool {
        let [a, b, c, d] = self.corners();
        b == c && ((b - a) - (d - c)).abs() <= 1e-12 * (1.0 + b.abs())
    }
}

#[inline]
pub(crate) fn trapezoid_degree([a, b, c, d]: [f64; 4], x: f64) -> f64 {
    if x < a || x > d {
        0.0
    } else if x < b {
        // a <= x < b implies b > a
        (x - a) / (b - a)
    } else if x <= c {
        1.0
    } else {
        // c < x <= d implies d > c
        (d - x) / (d - c)
    }
}

/// Degree of membership of `x` in `mf`.
pub fn membership_degree(mf: &MembershipFunction, x: f64) -> f64 {
    mf.degree(x)
}
