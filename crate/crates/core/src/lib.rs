//! Link-level simulation of broadband NRZ signalling through the human body
//! with an integrating dual-data-rate (DDR) receiver.
//!
//! The receiver integrates each bit period and resets, which nulls any
//! sinusoidal interferer whose period divides the bit period. Choosing the
//! bit rate therefore steers a notch onto the dominant FM-band interferer.
//!
//! Modules:
//! - [`signal`]: waveforms, PRBS data, NRZ modulation, power calibration
//! - [`channel`]: RC coupling channel, interferers, noise, superposition
//! - [`receiver`]: integrate-and-dump DDR receiver, direct sampler, phase search
//! - [`analysis`]: rejection math, eye diagrams, PSD, BER, body resonance
//! - [`scenario`]: declarative scenarios, presets, sweeps and CSV/JSON export

pub mod analysis;
pub mod channel;
mod error;
mod exec;
pub mod receiver;
pub mod scenario;
pub mod signal;

pub use error::{Error, Result};
pub use exec::is_parallel;
