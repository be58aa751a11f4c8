//! Scenario files, end-to-end runs, sweeps and artifact export.

pub mod config;
pub mod export;
pub mod presets;
pub mod run;
pub mod sweep;

pub use config::{Calibration, Derived, Scenario};
pub use presets::{preset, PRESET_NAMES};
pub use run::{export_eye, run, simulate, RunReport, Simulation, Which};
pub use sweep::{sweep_ber, sweep_ber_points, sweep_rejection, SweepAxis, SweepPoint};
