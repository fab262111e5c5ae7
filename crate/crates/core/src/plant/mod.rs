//! Bidirectional converter between a battery and a bus carrying an
//! ultracapacitor, with switched and duty-averaged fixed-step integration.

mod equations;
mod integrate;
mod params;

pub use equations::{
    averaged_derivatives, derivatives, textbook_derivatives, ConverterState, Derivatives, Direction,
    DutyCommand, PortCurrents, SwitchCommand, SwitchState,
};
pub use integrate::{hesm_current, EnergyTally, Plant, PlantState, StepReport};
pub use params::{battery_terminal, ultracap_terminal, BatteryModel, PlantParams, UltracapModel};
