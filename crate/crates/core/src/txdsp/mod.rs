//! Transmitter DSP: bits to a DAC-ready drive waveform.

mod dac;
mod format;
mod frame;
mod predistort;
mod shaping;

pub use dac::{dac_convert, quantize_channel, zoh_magnitude, DacParams};
pub use format::{map_bits_to_ask, ModFormat};
pub use frame::{build_frame, random_bits, FrameDescriptor, HeaderConfig, SymbolFrame};
pub use predistort::predistort;
pub use shaping::{shape_pulse, shape_symbols};

/// Gross line rate in bit/s for a dual-polarization m-ASK signal.
pub fn gross_bit_rate(fmt: &ModFormat, symbol_rate: f64) -> f64 {
    symbol_rate * fmt.bits_per_symbol() as f64 * 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gross_rates() {
        for (m, rate) in [(2, 128e9), (4, 256e9), (8, 384e9)] {
            let f = ModFormat::new(m).unwrap();
            assert_eq!(gross_bit_rate(&f, 64e9), rate);
        }
    }
}
