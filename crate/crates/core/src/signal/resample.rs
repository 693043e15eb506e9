use num_complex::Complex64;

use super::fft::{fft, ifft};
use super::Waveform;
use crate::{Error, Result};

/// Band-limited periodic resampling by zero-padding or truncating the spectrum.
///
/// The output holds `round(len * new_rate / old_rate)` samples spanning the
/// same time window; its `sample_rate` is the realized rate
/// `out_len / duration`, which differs from `new_rate` only by rounding.
pub fn resample(w: &Waveform, new_rate: f64) -> Result<Waveform> {
    if !(new_rate > 0.0) || !new_rate.is_finite() {
        return Err(Error::invalid(format!("resample rate must be positive, got {new_rate}")));
    }
    let n = w.len();
    let m = ((n as f64) * new_rate / w.sample_rate).round() as usize;
    if m == 0 {
        return Err(Error::invalid("resampled waveform would be empty"));
    }
    if m == n {
        return Ok(w.clone());
    }
    let mut spec = w.samples.clone();
    fft(&mut spec);

    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let common = n.min(m);
    let pos = common.div_ceil(2);
    let neg = (common - 1) / 2;
    out[..pos].copy_from_slice(&spec[..pos]);
    for k in 1..=neg {
        out[m - k] = spec[n - k];
    }
    if common % 2 == 0 {
        let h = common / 2;
        if m > n {
            // Split the old Nyquist bin across +/- fs/2 of the wider grid.
            out[h] = spec[h] * 0.5;
            out[m - h] = spec[h] * 0.5;
        } else {
            out[h] = spec[h] + spec[n - h];
        }
    }
    ifft(&mut out);
    let gain = m as f64 / n as f64;
    for v in &mut out {
        *v *= gain;
    }
    let realized = w.sample_rate * m as f64 / n as f64;
    Ok(Waveform {
        samples: out,
        sample_rate: realized,
        center_freq: w.center_freq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(n: usize, rate: f64, f: f64) -> Waveform {
        Waveform::new(
            (0..n).map(|i| Complex64::from_polar(1.0, 2.0 * PI * f * i as f64 / rate)).collect(),
            rate,
        )
        .unwrap()
    }

    #[test]
    fn identity_rate() {
        let w = tone(100, 10e9, 1e9);
        assert_eq!(resample(&w, 10e9).unwrap(), w);
    }

    #[test]
    fn round_trip_tone() {
        let rate = 128e9;
        let n = 1024;
        // 1 GHz on an integer number of cycles: 1024 / 128 = 8 cycles
        let w = tone(n, rate, 1e9);
        let up = resample(&w, 2.0 * rate).unwrap();
        assert_eq!(up.len(), 2 * n);
        let down = resample(&up, rate).unwrap();
        let err = w.samples.iter().zip(&down.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        // interpolated points sit on the tone too
        let direct = tone(2 * n, 2.0 * rate, 1e9);
        let err = up.samples.iter().zip(&direct.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9);
    }

    #[test]
    fn length_rounds() {
        let w = tone(70504, 128e9, 1e9);
        let r = resample(&w, 84e9).unwrap();
        assert_eq!(r.len(), 46268); // round(46268.25)
        assert!((r.sample_rate - 84e9).abs() / 84e9 < 1e-5);
        assert!((r.duration() - w.duration()).abs() < 1e-18);
    }
}
