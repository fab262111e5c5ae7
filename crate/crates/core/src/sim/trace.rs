use alloc::vec::Vec;

use crate::plant::{Direction, DutyCommand};

/// Bits of [`TraceSample::flags`].
pub mod flags {
    /// The inductor current was held at zero by a blocking diode at least once
    /// since the previous sample.
    pub const DCM: u8 = 1;
    /// The fuzzy supervisor saw inputs that activated no output set.
    pub const UNCOVERED: u8 = 2;

    pub const NAMES: [(u8, &str); 2] = [(DCM, "dcm"), (UNCOVERED, "uncovered")];

    pub fn labels(bits: u8) -> impl Iterator<Item = &'static str> {
        NAMES.into_iter().filter(move |(b, _)| bits & b != 0).map(|(_, n)| n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub v_bus: f64,
    pub i_l: f64,
    pub i_batt: f64,
    pub i_uc: f64,
    pub zeta: f64,
    pub soc: f64,
    pub v_uc: f64,
    pub i_limit: f64,
    pub ctrl_state: Direction,
    pub supervisor_state: &'static str,
    pub flags: u8,
    pub v_c1: f64,
    /// Duty-averaged bus slope over the step that ends at this instant, V/s.
    pub dv_bus_dt: f64,
    /// HESM current fed to the supervisor, computed from `dv_bus_dt`.
    pub i_hesm: f64,
    pub i_batt_ref: f64,
    pub duty: DutyCommand,
}

/// Uniformly decimated record of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub samples: Vec<TraceSample>,
    /// Integration step, s.
    pub dt: f64,
    /// Integration steps between consecutive samples.
    pub decimation: u64,
}

impl Trace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn last(&self) -> Option<&TraceSample> {
        self.samples.last()
    }
}
