//! Electro-optic transmitter front end: driver/MZM response, MZM field
//! transfer, laser and polarization-multiplexing emulation.

mod laser;
mod mzm;
mod polmux;
mod response;

pub use laser::LaserModel;
pub use mzm::{apply_driver, mzm_modulate, Bias, MzmParams};
pub use polmux::polmux;
pub use response::{chip_response_model, bessel4_lowpass, FreqResponse};

/// Default S21 anchors of the integrated driver + MZM: 0 dB at DC, −3 dB at
/// 11 GHz, −6 dB at 35 GHz.
pub const CHIP_ANCHORS: [(f64, f64); 3] = [(0.0, 0.0), (11e9, -3.0), (35e9, -6.0)];
