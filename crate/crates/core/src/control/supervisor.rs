use crate::fuzzy::FuzzyController;

use super::ifthen::IfThenController;

/// Battery current limit issued by a supervisory controller.
///
/// Positive values permit discharge up to that rate, negative values command
/// recharge at that rate, zero forbids battery flow.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SupervisorOutput {
    pub i_batt_limit: f64,
    pub uncovered_input_flag: bool,
}

pub fn flc_supervise(fc: &FuzzyController, v_bus: f64, i_hesm: f64) -> SupervisorOutput {
    let inf = fc.infer_detailed(v_bus, i_hesm);
    SupervisorOutput {
        i_batt_limit: inf.value,
        uncovered_input_flag: inf.uncovered,
    }
}

/// Either supervisory controller behind one calling convention. The run loop
/// only ever talks to this type.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Supervisor {
    Fuzzy(FuzzyController),
    IfThen(IfThenController),
}

impl Supervisor {
    pub fn supervise(&mut self, v_bus: f64, i_hesm: f64) -> SupervisorOutput {
        match self {
            Supervisor::Fuzzy(fc) => flc_supervise(fc, v_bus, i_hesm),
            Supervisor::IfThen(c) => c.supervise(v_bus),
        }
    }

    /// Label for the supervisor's internal mode; the fuzzy controller is
    /// stateless and always reports `flc`.
    pub fn state_label(&self) -> &'static str {
        match self {
            Supervisor::Fuzzy(_) => "flc",
            Supervisor::IfThen(c) => c.state.as_str(),
        }
    }
}
