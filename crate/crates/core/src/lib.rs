//! Simulation of a 64-GBd dual-polarization bipolar m-ASK coherent optical link.
//!
//! The crate is organized the way the signal flows:
//!
//! - [`signal`]: waveform types, PRBS, RRC design, resampling, PSD estimation
//! - [`txdsp`]: bit mapping, framing, pulse shaping, pre-distortion, DAC model
//! - [`eo`]: driver/MZM response, MZM sine transfer, laser, PolMux emulation
//! - [`channel`]: split-step fiber model, noise loading, amplifiers, OSNR metrology
//! - [`rxfront`]: optical filtering, polarization rotation, coherent detection, ADC
//! - [`rxdsp`]: synchronization, MIMO and DD equalizers, carrier recovery, BER/Q²
//! - [`harness`]: configuration, sweeps, theory curves, penalties and reports

pub mod channel;
pub mod eo;
pub mod error;
pub mod harness;
pub mod rxdsp;
pub mod rxfront;
pub mod signal;
pub mod txdsp;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Default optical carrier, Hz.
pub const CARRIER_HZ: f64 = 193.4e12;
/// Default symbol rate, Bd.
pub const SYMBOL_RATE: f64 = 64e9;
