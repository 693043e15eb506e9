use num_complex::Complex64;

use crate::eo::FreqResponse;
use crate::signal::{apply_real_response, Waveform};
use crate::{Error, Result};

/// Zero-forcing inverse of `cascade`, magnitude boost capped at `max_boost_db`.
///
/// The pre-distorter is `min(1/|H|, cap) · exp(-j·arg H)`; for a minimum-phase
/// cascade this is the minimum-phase inverse. Without a cap, a cascade with a
/// zero anywhere in the waveform's band is rejected.
pub fn predistort(w: &Waveform, cascade: &FreqResponse, max_boost_db: Option<f64>) -> Result<Waveform> {
    let cap = max_boost_db.map(|db| 10f64.powf(db / 20.0));
    let nyquist = w.sample_rate / 2.0;
    if cap.is_none() {
        let n = 1024;
        for i in 0..=n {
            let f = nyquist * i as f64 / n as f64;
            if cascade.eval(f).norm() < 1e-12 {
                return Err(Error::invalid(format!(
                    "cascade has a zero at {f:.3e} Hz and no boost cap is set"
                )));
            }
        }
    }
    let inverse = |f: f64| -> Complex64 {
        let h = cascade.eval(f);
        let mag = h.norm();
        let boost = match cap {
            Some(c) if mag * c < 1.0 => c,
            _ => 1.0 / mag,
        };
        Complex64::from_polar(boost, -h.arg())
    };
    Ok(w.with_samples(apply_real_response(&w.samples, w.sample_rate, inverse)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(rate: f64, f: f64, n: usize) -> Waveform {
        Waveform::from_real(
            &(0..n).map(|i| (2.0 * PI * f * i as f64 / rate).cos()).collect::<Vec<_>>(),
            rate,
        )
        .unwrap()
    }

    #[test]
    fn unity_cascade_is_identity() {
        let w = tone(128e9, 3e9, 1280);
        let out = predistort(&w, &FreqResponse::unity(), Some(20.0)).unwrap();
        for (a, b) in w.samples.iter().zip(&out.samples) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_pole_boost_at_corner() {
        // H = 1 / (1 + j f/fc): |H(fc)|² = 1/2
        let fc = 11e9;
        let freqs: Vec<f64> = (0..=2000).map(|i| i as f64 * 64e9 / 2000.0).collect();
        let gains = freqs.iter().map(|&f| Complex64::new(1.0, f / fc).inv()).collect();
        let h = FreqResponse::new(freqs, gains).unwrap();
        let rate = 128e9;
        let n = 128 * 100;
        let w = tone(rate, fc, n);
        let out = predistort(&w, &h, Some(20.0)).unwrap();
        let gain_db = 10.0 * (out.power() / w.power()).log10();
        assert!((gain_db - 3.0103).abs() < 0.05, "{gain_db}");
    }

    #[test]
    fn zero_without_cap_rejected() {
        let h = FreqResponse::new(
            vec![0.0, 10e9, 20e9],
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)],
        )
        .unwrap();
        let w = tone(64e9, 1e9, 640);
        assert!(predistort(&w, &h, None).is_err());
        assert!(predistort(&w, &h, Some(20.0)).is_ok());
    }
}
