use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::membership::MembershipFunction;
use super::SET_COUNT;
use crate::error::ConfigError;

/// Labelled fuzzy set inside a linguistic variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzySet {
    pub label: String,
    pub shape: MembershipFunction,
}

impl FuzzySet {
    pub fn new(label: &str, shape: MembershipFunction) -> Self {
        Self {
            label: label.into(),
            shape,
        }
    }
}

/// Degree vector, one entry per set in variable order.
pub type Degrees = [f64; SET_COUNT];

/// A named input or output quantity partitioned into five ordered sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinguisticVariable {
    pub name: String,
    pub units: String,
    /// Closed interval `[lo, hi]`.
    pub universe: [f64; 2],
    pub sets: Vec<FuzzySet>,
}

impl LinguisticVariable {
    pub fn lo(&self) -> f64 {
        self.universe[0]
    }

    pub fn hi(&self) -> f64 {
        self.universe[1]
    }

    pub fn span(&self) -> f64 {
        self.universe[1] - self.universe[0]
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.universe[0], self.universe[1])
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.sets.iter().position(|s| s.label == label)
    }

    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        let [lo, hi] = self.universe;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ConfigError::schema(
                format!("{path}.universe"),
                "universe must be a finite interval with lo < hi",
            ));
        }
        if self.sets.len() != SET_COUNT {
            return Err(ConfigError::schema(
                format!("{path}.sets"),
                format!("exactly {SET_COUNT} sets required, got {}", self.sets.len()),
            ));
        }
        for (i, set) in self.sets.iter().enumerate() {
            let set_path = format!("{path}.sets[{i}]");
            if set.label.is_empty() {
                return Err(ConfigError::schema(format!("{set_path}.label"), "empty label"));
            }
            if self.sets[..i].iter().any(|s| s.label == set.label) {
                return Err(ConfigError::invariant(
                    format!("{set_path}.label"),
                    format!("duplicate label `{}`", set.label),
                ));
            }
            set.shape.validate(&format!("{set_path}.shape"))?;
            let (a, d) = set.shape.support();
            if a < lo || d > hi {
                return Err(ConfigError::invariant(
                    format!("{set_path}.shape.points"),
                    "set support leaves the universe",
                ));
            }
        }
        for i in 1..SET_COUNT {
            if self.sets[i].shape.peak() <= self.sets[i - 1].shape.peak() {
                return Err(ConfigError::invariant(
                    format!("{path}.sets[{i}]"),
                    "set peaks must be strictly increasing along the universe",
                ));
            }
        }
        if let Some(x) = self.uncovered_point() {
            return Err(ConfigError::invariant(
                format!("{path}.sets"),
                format!("no set covers x = {x}"),
            ));
        }
        Ok(())
    }

    /// A point of the universe where every set has zero degree, if any.
    ///
    /// The degrees are linear between consecutive breakpoints, so checking the
    /// breakpoints themselves plus one interior point per gap is exhaustive.
    pub fn uncovered_point(&self) -> Option<f64> {
        let [lo, hi] = self.universe;
        let mut crit: Vec<f64> = self
            .sets
            .iter()
            .flat_map(|s| s.shape.corners())
            .filter(|p| *p >= lo && *p <= hi)
            .collect();
        crit.push(lo);
        crit.push(hi);
        crit.sort_by(f64::total_cmp);
        crit.dedup();
        let mut probes = crit.clone();
        probes.extend(crit.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        probes
            .into_iter()
            .find(|&x| self.sets.iter().all(|s| s.shape.degree(x) <= 0.0))
    }
}

/// Degrees of membership of `x` in every set of `var`. Inputs outside the
/// universe are clamped to its nearest end first.
pub fn fuzzify(var: &LinguisticVariable, x: f64) -> Degrees {
    let x = var.clamp(x);
    let mut out = [0.0; SET_COUNT];
    for (o, set) in out.iter_mut().zip(&var.sets) {
        *o = set.shape.degree(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::defaults;

    #[test]
    fn clamps_out_of_universe_inputs() {
        let v = defaults::bus_voltage();
        assert_eq!(fuzzify(&v, v.lo() - 10.0), fuzzify(&v, v.lo()));
        assert_eq!(fuzzify(&v, v.hi() + 3.0), fuzzify(&v, v.hi()));
    }

    #[test]
    fn good_peak_is_full_member() {
        let v = defaults::bus_voltage();
        let d = fuzzify(&v, 24.0);
        assert_eq!(d, [0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn adjacent_crossovers_sum_to_one() {
        // crossover points of the default partitions, found by hand:
        // bus voltage sets meet halfway between peaks, current sets likewise
        let v = defaults::bus_voltage();
        for x in [21.75, 23.25, 24.75, 26.25] {
            let d = fuzzify(&v, x);
            let nonzero: Vec<f64> = d.iter().copied().filter(|m| *m > 0.0).collect();
            assert_eq!(nonzero.len(), 2, "x = {x}");
            assert!((nonzero[0] - 0.5).abs() < 1e-15 && (nonzero[1] - 0.5).abs() < 1e-15);
        }
        let i = defaults::hesm_current();
        for x in [-30.0, -12.5, 12.5, 30.0] {
            let d = fuzzify(&i, x);
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15, "x = {x}");
        }
    }

    #[test]
    fn defaults_validate() {
        defaults::bus_voltage().validate("v").unwrap();
        defaults::hesm_current().validate("i").unwrap();
        defaults::battery_limit().validate("o").unwrap();
    }

    #[test]
    fn coverage_gap_is_reported() {
        let mut v = defaults::bus_voltage();
        v.sets[2].shape = MembershipFunction::triangular(23.0, 24.0, 25.0);
        // Low ends at 24 and High starts at 24, so there is no gap yet
        assert!(v.uncovered_point().is_none());
        v.sets[1].shape = MembershipFunction::triangular(20.0, 22.0, 22.5);
        let x = v.uncovered_point().unwrap();
        assert!(x > 22.0 && x < 23.0);
        assert!(v.validate("v").is_err());
    }

    #[test]
    fn peak_order_and_support_checked() {
        let mut v = defaults::bus_voltage();
        v.sets.swap(1, 2);
        assert!(v.validate("v").is_err());
        let mut v = defaults::bus_voltage();
        v.sets[4].shape = MembershipFunction::trapezoidal(25.5, 27.0, 30.0, 31.0);
        let err = v.validate("v").unwrap_err();
        assert_eq!(err.path, "v.sets[4].shape.points");
    }
}
