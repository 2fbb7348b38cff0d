//! Multi-seed experiment runner for the circuit and network Q-learning agents:
//! named presets, TOML configs, curve aggregation, Q-value surfaces and
//! run comparisons.

pub mod config;
pub mod error;
pub mod experiment;
pub mod gradcheck;
pub mod presets;
pub mod report;
pub mod surface;

pub use error::{HarnessError, Result};
