//! Load profile, closed-loop run, trace capture and bus-voltage metrics.

mod config;
mod metrics;
mod profile;
mod run;
mod trace;

pub use config::{ControllerConfig, IntegrationConfig, Mode, SimConfig, SupervisorKind};
pub use metrics::{compare, compute_metrics, cycle_means, Improvement, Metrics};
pub use profile::{load_current, LoadProfile, Phase, PulseLevels};
pub use run::{run, RunOutput};
pub use trace::{flags, Trace, TraceSample};
