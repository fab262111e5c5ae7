use alloc::string::String;
use core::fmt;

/// Which class of configuration problem was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigErrorKind {
    /// A single field is out of its allowed range or has the wrong shape.
    Schema,
    /// Fields are individually valid but violate a relation between them.
    Invariant,
}

/// Configuration validation failure, located by a dotted key path.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            kind: ConfigErrorKind::Schema,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn invariant(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            kind: ConfigErrorKind::Invariant,
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ConfigErrorKind::Schema => "schema violation",
            ConfigErrorKind::Invariant => "invariant violation",
        };
        write!(f, "{kind} at `{}`: {}", self.path, self.message)
    }
}

impl core::error::Error for ConfigError {}

/// Runtime faults raised while stepping a simulation.
#[derive(Clone, Debug, PartialEq)]
pub enum SimFault {
    /// Both converter switches commanded on at once.
    ShootThrough { t: f64 },
    /// A switch pattern with no defining equation in textbook mode.
    InvalidSwitchState { t: f64 },
    /// Non-finite state, or bus voltage outside `[0, 2 * nominal]`.
    Divergence { t: f64, v_bus: f64 },
    /// Battery extracted charge left `[0, capacity]`.
    BatteryBounds { t: f64, soc: f64 },
    /// Load profile queried outside `[0, t_end]`.
    ProfileQuery { t: f64 },
    /// Trace too short to evaluate the requested metric.
    Metric(&'static str),
}

impl fmt::Display for SimFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimFault::ShootThrough { t } => write!(f, "shoot-through commanded at t = {t} s"),
            SimFault::InvalidSwitchState { t } => {
                write!(f, "switch pattern has no textbook equation at t = {t} s")
            }
            SimFault::Divergence { t, v_bus } => {
                write!(f, "divergence at t = {t} s (bus voltage {v_bus} V)")
            }
            SimFault::BatteryBounds { t, soc } => {
                write!(f, "battery depleted/overcharged at t = {t} s (soc {soc})")
            }
            SimFault::ProfileQuery { t } => write!(f, "load profile queried out of range at t = {t} s"),
            SimFault::Metric(what) => write!(f, "metric fault: {what}"),
        }
    }
}

impl core::error::Error for SimFault {}
