use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::{fft, ifft};
use crate::{Error, Result};

/// Root-raised-cosine taps, unit energy, `span_symbols * sps + 1` long.
pub fn design_rrc(rolloff: f64, span_symbols: usize, sps: usize) -> Result<Vec<f64>> {
    if !(rolloff > 0.0 && rolloff <= 1.0) {
        return Err(Error::invalid(format!("RRC roll-off must be in (0, 1], got {rolloff}")));
    }
    if span_symbols == 0 || span_symbols % 2 != 0 {
        return Err(Error::invalid(format!("RRC span must be even and nonzero, got {span_symbols}")));
    }
    if sps < 2 {
        return Err(Error::invalid(format!("RRC needs at least 2 samples per symbol, got {sps}")));
    }
    let n = span_symbols * sps + 1;
    let center = (n / 2) as f64;
    let b = rolloff;
    let mut taps: Vec<f64> = (0..n)
        .map(|k| {
            let t = (k as f64 - center) / sps as f64;
            if t.abs() < 1e-12 {
                1.0 - b + 4.0 * b / PI
            } else if ((4.0 * b * t).abs() - 1.0).abs() < 1e-9 {
                let a = PI / (4.0 * b);
                b / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos())
            } else {
                let num = (PI * t * (1.0 - b)).sin() + 4.0 * b * t * (PI * t * (1.0 + b)).cos();
                let den = PI * t * (1.0 - (4.0 * b * t).powi(2));
                num / den
            }
        })
        .collect();
    let energy: f64 = taps.iter().map(|t| t * t).sum();
    let norm = energy.sqrt();
    for t in &mut taps {
        *t /= norm;
    }
    Ok(taps)
}

/// Circular convolution with a centered real FIR (zero group delay).
pub fn filter_circular(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let mut h = vec![Complex64::new(0.0, 0.0); n];
    let center = taps.len() / 2;
    for (k, &t) in taps.iter().enumerate() {
        let idx = (k as isize - center as isize).rem_euclid(n as isize) as usize;
        h[idx] += t;
    }
    let mut xf = x.to_vec();
    fft(&mut xf);
    fft(&mut h);
    for (a, b) in xf.iter_mut().zip(&h) {
        *a *= b;
    }
    ifft(&mut xf);
    xf
}
