//! Supervisory controllers and the cascaded PI loops beneath them.

mod cascade;
mod ifthen;
mod pi;
mod supervisor;

pub use cascade::{
    cascade_update, reference_bounds, select_direction, CascadeConfig, CascadeGains, CascadeOutput, ControllerStack,
    LoopGains, Measured,
};
pub use ifthen::{if_then_supervise, IfThenConfig, IfThenController, IfThenState};
pub use pi::{pi_update, PIGains, PIState, PiConfig};
pub use supervisor::{flc_supervise, Supervisor, SupervisorOutput};
