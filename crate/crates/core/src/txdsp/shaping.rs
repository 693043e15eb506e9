use num_complex::Complex64;

use super::frame::SymbolFrame;
use crate::signal::{filter_circular, Waveform};
use crate::{Error, Result};

/// Upsamples by `sps` and filters circularly with `rrc`.
pub fn shape_symbols(symbols: &[f64], sps: usize, rrc: &[f64], symbol_rate: f64) -> Result<Waveform> {
    if sps < 2 {
        return Err(Error::invalid(format!("pulse shaping needs sps >= 2, got {sps}")));
    }
    let mut up = vec![Complex64::new(0.0, 0.0); symbols.len() * sps];
    for (i, &s) in symbols.iter().enumerate() {
        up[i * sps] = Complex64::new(s, 0.0);
    }
    Waveform::new(filter_circular(&up, rrc), symbol_rate * sps as f64)
}

pub fn shape_pulse(frame: &SymbolFrame, sps: usize, rrc: &[f64], symbol_rate: f64) -> Result<Waveform> {
    shape_symbols(&frame.symbols, sps, rrc, symbol_rate)
}
