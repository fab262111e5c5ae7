//! Mamdani fuzzy inference: fuzzification, min/max rule evaluation, centroid
//! defuzzification.

mod defuzz;
mod membership;
mod rules;
mod variable;

pub use defuzz::{defuzzify, Defuzzified, InferenceConfig, OutputGrid, MIN_DEFUZZ_RESOLUTION};
pub use membership::{membership_degree, MembershipFunction, MembershipKind};
pub use rules::{evaluate_rules, RuleBase, RuleTable};
pub use variable::{fuzzify, Degrees, FuzzySet, LinguisticVariable};

use alloc::format;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Every linguistic variable has exactly this many sets.
pub const SET_COUNT: usize = 5;

/// Serializable controller definition: two inputs, one output, rule matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FuzzyControllerDef {
    pub bus_voltage: LinguisticVariable,
    pub hesm_current: LinguisticVariable,
    pub output: LinguisticVariable,
    pub rules: RuleBase,
    pub inference: InferenceConfig,
}

impl Default for FuzzyControllerDef {
    fn default() -> Self {
        Self {
            bus_voltage: defaults::bus_voltage(),
            hesm_current: defaults::hesm_current(),
            output: defaults::battery_limit(),
            rules: defaults::rule_base(),
            inference: InferenceConfig::default(),
        }
    }
}

impl FuzzyControllerDef {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        self.bus_voltage.validate(&format!("{path}.bus_voltage"))?;
        self.hesm_current.validate(&format!("{path}.hesm_current"))?;
        self.output.validate(&format!("{path}.output"))?;
        self.inference.validate(&format!("{path}.inference"))?;
        self.rules.resolve(&self.output, &format!("{path}.rules"))?;
        Ok(())
    }
}

/// Result of one inference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inference {
    pub value: f64,
    pub uncovered: bool,
    pub activations: Degrees,
}

/// Validated controller with its rule table resolved and the output grid
/// tabulated. Immutable after construction.
#[derive(Clone, Debug)]
pub struct FuzzyController {
    def: FuzzyControllerDef,
    table: RuleTable,
    grid: OutputGrid,
}

impl FuzzyController {
    pub fn new(def: FuzzyControllerDef) -> Result<Self, ConfigError> {
        Self::at_path(def, "flc")
    }

    /// As [`FuzzyController::new`], reporting errors under `path`.
    pub fn at_path(def: FuzzyControllerDef, path: &str) -> Result<Self, ConfigError> {
        def.validate(path)?;
        let table = def.rules.resolve(&def.output, &format!("{path}.rules"))?;
        let grid = OutputGrid::new(&def.output, def.inference.defuzz_resolution);
        Ok(Self { def, table, grid })
    }

    pub fn def(&self) -> &FuzzyControllerDef {
        &self.def
    }

    pub fn table(&self) -> &RuleTable {
        &self.table
    }

    /// Activation of every output set for the given inputs.
    pub fn activations(&self, v_bus: f64, i_hesm: f64) -> Degrees {
        let dv = fuzzify(&self.def.bus_voltage, v_bus);
        let di = fuzzify(&self.def.hesm_current, i_hesm);
        evaluate_rules(&self.table, &dv, &di)
    }

    pub fn infer_detailed(&self, v_bus: f64, i_hesm: f64) -> Inference {
        let activations = self.activations(v_bus, i_hesm);
        let d = self.grid.centroid(&activations);
        Inference {
            value: d.value,
            uncovered: d.uncovered,
            activations,
        }
    }
}

/// Battery current limit (A) for a bus voltage (V) and HESM current (A).
pub fn infer(fc: &FuzzyController, v_bus: f64, i_hesm: f64) -> f64 {
    fc.infer_detailed(v_bus, i_hesm).value
}

/// Default partitions and rule matrix.
pub mod defaults {
    use super::*;

    pub const BUS_LABELS: [&str; SET_COUNT] = ["Very Low", "Low", "Good", "High", "Very High"];
    pub const CURRENT_LABELS: [&str; SET_COUNT] = ["High Out", "Low Out", "No Flow", "Low In", "High In"];
    pub const OUTPUT_LABELS: [&str; SET_COUNT] =
        ["High Recharge", "Low Recharge", "No Flow", "Low Discharge", "High Discharge"];

    fn variable(name: &str, units: &str, universe: [f64; 2], labels: [&str; SET_COUNT], shapes: [MembershipFunction; SET_COUNT]) -> LinguisticVariable {
        LinguisticVariable {
            name: name.into(),
            units: units.into(),
            universe,
            sets: labels
                .iter()
                .zip(shapes)
                .map(|(l, s)| FuzzySet::new(l, s))
                .collect(),
        }
    }

    /// DC bus voltage, 18..30 V, Good centered on 24 V with 1.5 V between peaks.
    pub fn bus_voltage() -> LinguisticVariable {
        variable(
            "bus_voltage",
            "V",
            [18.0, 30.0],
            BUS_LABELS,
            [
                MembershipFunction::trapezoidal(18.0, 18.0, 21.0, 22.5),
                MembershipFunction::triangular(21.0, 22.5, 24.0),
                MembershipFunction::triangular(22.5, 24.0, 25.5),
                MembershipFunction::triangular(24.0, 25.5, 27.0),
                MembershipFunction::trapezoidal(25.5, 27.0, 30.0, 30.0),
            ],
        )
    }

    /// HESM current, -60..60 A, positive when the module sources the bus.
    /// "In" sets sit on the sourcing side: current flowing into the bus.
    pub fn hesm_current() -> LinguisticVariable {
        variable(
            "hesm_current",
            "A",
            [-60.0, 60.0],
            CURRENT_LABELS,
            [
                MembershipFunction::trapezoidal(-60.0, -60.0, -35.0, -25.0),
                MembershipFunction::triangular(-35.0, -25.0, 0.0),
                MembershipFunction::triangular(-25.0, 0.0, 25.0),
                MembershipFunction::triangular(0.0, 25.0, 35.0),
                MembershipFunction::trapezoidal(25.0, 35.0, 60.0, 60.0),
            ],
        )
    }

    /// Battery current limit, -30..30 A (2C of a 15 Ah pack), positive
    /// permits discharge.
    pub fn battery_limit() -> LinguisticVariable {
        variable(
            "battery_limit",
            "A",
            [-30.0, 30.0],
            OUTPUT_LABELS,
            [
                MembershipFunction::trapezoidal(-30.0, -30.0, -19.0, -7.0),
                MembershipFunction::triangular(-19.0, -7.0, 0.0),
                MembershipFunction::triangular(-7.0, 0.0, 7.0),
                MembershipFunction::triangular(0.0, 7.0, 19.0),
                MembershipFunction::trapezoidal(7.0, 19.0, 30.0, 30.0),
            ],
        )
    }

    /// Rows: HESM current High Out..High In. Columns: bus Very Low..Very High.
    pub const RULES: [[&str; SET_COUNT]; SET_COUNT] = [
        ["No Flow", "Low Recharge", "High Recharge", "High Recharge", "High Recharge"],
        ["Low Discharge", "No Flow", "Low Recharge", "High Recharge", "High Recharge"],
        ["High Discharge", "Low Discharge", "No Flow", "Low Recharge", "High Recharge"],
        ["High Discharge", "High Discharge", "Low Discharge", "No Flow", "Low Recharge"],
        ["High Discharge", "High Discharge", "High Discharge", "Low Discharge", "No Flow"],
    ];

    pub fn rule_base() -> RuleBase {
        RuleBase::from_labels(RULES)
    }
}
