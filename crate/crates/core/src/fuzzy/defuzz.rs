use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::membership::trapezoid_degree;
use super::variable::{Degrees, LinguisticVariable};
use super::SET_COUNT;
use crate::error::ConfigError;

pub const MIN_DEFUZZ_RESOLUTION: usize = 101;

/// Inference settings. Composition is fixed: min for AND, min (clipping) for
/// implication, max for aggregation; only the centroid sampling is tunable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InferenceConfig {
    /// Number of midpoint samples across the output universe.
    pub defuzz_resolution: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            defuzz_resolution: 10_001,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        if self.defuzz_resolution < MIN_DEFUZZ_RESOLUTION {
            return Err(ConfigError::schema(
                alloc::format!("{path}.defuzz_resolution"),
                alloc::format!("must be at least {MIN_DEFUZZ_RESOLUTION}"),
            ));
        }
        Ok(())
    }
}

/// Crisp output of a centroid defuzzification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Defuzzified {
    pub value: f64,
    /// No output set was active; `value` is the universe midpoint.
    pub uncovered: bool,
}

/// Output-set degrees tabulated at the midpoint sample locations.
#[derive(Clone, Debug)]
pub struct OutputGrid {
    xs: Vec<f64>,
    degrees: Vec<Degrees>,
    midpoint: f64,
}

impl OutputGrid {
    pub fn new(out_var: &LinguisticVariable, resolution: usize) -> Self {
        let n = resolution.max(1);
        let (lo, hi) = (out_var.lo(), out_var.hi());
        let h = (hi - lo) / n as f64;
        let corners: Vec<[f64; 4]> = out_var.sets.iter().map(|s| s.shape.corners()).collect();
        let xs: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect();
        let degrees = xs
            .iter()
            .map(|&x| {
                let mut d = [0.0; SET_COUNT];
                for (dj, c) in d.iter_mut().zip(&corners) {
                    *dj = trapezoid_degree(*c, x);
                }
                d
            })
            .collect();
        Self {
            xs,
            degrees,
            midpoint: 0.5 * (lo + hi),
        }
    }

    /// Centroid of the max-aggregate of every set clipped at its activation.
    pub fn centroid(&self, activations: &Degrees) -> Defuzzified {
        let mut moment = 0.0;
        let mut area = 0.0;
        for (x, d) in self.xs.iter().zip(&self.degrees) {
            let mut mu = 0.0f64;
            for (a, m) in activations.iter().zip(d) {
                mu = mu.max(a.min(*m));
            }
            moment += x * mu;
            area += mu;
        }
        if area > 0.0 {
            Defuzzified {
                value: moment / area,
                uncovered: false,
            }
        } else {
            Defuzzified {
                value: self.midpoint,
                uncovered: true,
            }
        }
    }
}

/// Centroid defuzzification by midpoint sampling at `cfg.defuzz_resolution`
/// points. All-zero activations return the universe midpoint with
/// `uncovered` set.
pub fn defuzzify(out_var: &LinguisticVariable, activations: &Degrees, cfg: &InferenceConfig) -> Defuzzified {
    OutputGrid::new(out_var, cfg.defuzz_resolution).centroid(activations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::membership::MembershipFunction;
    use crate::fuzzy::variable::FuzzySet;

    fn var(sets: [MembershipFunction; 5], lo: f64, hi: f64) -> LinguisticVariable {
        LinguisticVariable {
            name: "out".into(),
            units: "A".into(),
            universe: [lo, hi],
            sets: sets
                .into_iter()
                .enumerate()
                .map(|(i, s)| FuzzySet::new(["a", "b", "c", "d", "e"][i], s))
                .collect(),
        }
    }

    fn symmetric_var() -> LinguisticVariable {
        var(
            [
                MembershipFunction::triangular(-30.0, -20.0, -10.0),
                MembershipFunction::triangular(-20.0, -10.0, 0.0),
                MembershipFunction::triangular(-10.0, 0.0, 10.0),
                MembershipFunction::triangular(0.0, 10.0, 20.0),
                MembershipFunction::triangular(10.0, 20.0, 30.0),
            ],
            -30.0,
            30.0,
        )
    }

    #[test]
    fn single_symmetric_set_returns_its_peak() {
        let out = defuzzify(&symmetric_var(), &[0.0, 0.0, 1.0, 0.0, 0.0], &InferenceConfig::default());
        assert!(out.value.abs() < 1e-12);
        assert!(!out.uncovered);
    }

    #[test]
    fn mirror_sets_cancel() {
        let out = defuzzify(&symmetric_var(), &[0.0, 0.7, 0.0, 0.7, 0.0], &InferenceConfig::default());
        assert!(out.value.abs() < 1e-9, "{}", out.value);
    }

    #[test]
    fn all_zero_activations_flag_the_sample() {
        let v = symmetric_var();
        let out = defuzzify(&v, &[0.0; 5], &InferenceConfig::default());
        assert!(out.uncovered);
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn clipped_triangle_matches_fine_trapezoid_oracle() {
        // triangle (0, 10, 20) clipped at 0.5 on a [0, 20] universe, filler
        // sets left inactive
        let v = var(
            [
                MembershipFunction::triangular(0.0, 10.0, 20.0),
                MembershipFunction::triangular(0.0, 11.0, 20.0),
                MembershipFunction::triangular(0.0, 12.0, 20.0),
                MembershipFunction::triangular(0.0, 13.0, 20.0),
                MembershipFunction::triangular(0.0, 14.0, 20.0),
            ],
            0.0,
            20.0,
        );
        let n = 1_000_000;
        let (mut num, mut den) = (0.0, 0.0);
        let f = |x: f64| v.sets[0].shape.degree(x).min(0.5);
        let h = 20.0 / n as f64;
        for i in 0..=n {
            let x = i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            num += w * x * f(x);
            den += w * f(x);
        }
        let oracle = num / den;
        let got = defuzzify(&v, &[0.5, 0.0, 0.0, 0.0, 0.0], &InferenceConfig::default());
        assert!((got.value - oracle).abs() <= 1e-6 * 20.0, "{} vs {oracle}", got.value);
    }

    #[test]
    fn resolution_floor() {
        assert!(InferenceConfig { defuzz_resolution: 100 }.validate("x").is_err());
        assert!(InferenceConfig { defuzz_resolution: 101 }.validate("x").is_ok());
    }
}
