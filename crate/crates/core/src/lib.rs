//! Hybrid energy storage module (battery + ultracapacitor behind a
//! bidirectional converter) feeding a pulsed DC load.
//!
//! The crate is `no_std` with `alloc`. It contains the numerical pieces only:
//!
//! - [`fuzzy`]: Mamdani inference with centroid defuzzification.
//! - [`plant`]: switched and duty-averaged converter/storage model, RK4 steps.
//! - [`control`]: fuzzy and if-then supervisors, cascaded PI loops.
//! - [`sim`]: load profile, run loop, trace capture and swing/sag metrics.
//!
//! File formats, the command-line tool and parallel sweeps live in the
//! `hesm-sim` crate.

#![no_std]

extern crate alloc;

pub mod control;
pub mod error;
pub mod fuzzy;
pub mod plant;
pub mod sim;

pub use error::{ConfigError, ConfigErrorKind, SimFault};
