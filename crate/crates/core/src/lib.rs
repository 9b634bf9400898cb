//! Quantum optimal control with pulse-width-modulated (PWM) control fields.
//!
//! Units: ħ = 1, time in seconds, frequencies in rad/s unless a name says Hz.

pub mod error;
pub mod experiment;
pub mod linalg;
pub mod optimize;
pub mod propagate;
pub mod pulse;
pub mod spin;

pub use error::{QocError, Result};
