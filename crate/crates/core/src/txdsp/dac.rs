use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::signal::{apply_real_response, resample, SimRng, Waveform};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DacParams {
    pub sample_rate: f64,
    /// Effective number of bits; `None` disables quantization.
    pub enob: Option<f64>,
    /// Clip level in units of the signal RMS.
    pub clip_sigma: f64,
    pub include_zoh: bool,
}

impl Default for DacParams {
    fn default() -> Self {
        Self {
            sample_rate: 84e9,
            enob: Some(5.0),
            clip_sigma: 3.3,
            include_zoh: true,
        }
    }
}

impl DacParams {
    pub fn transparent(sample_rate: f64) -> Self {
        Self {
            sample_rate,
            enob: None,
            clip_sigma: 3.3,
            include_zoh: false,
        }
    }
}

/// Clips one real channel at `±clip_sigma·RMS` and quantizes it.
///
/// The quantizer is uniform mid-rise with `ceil(enob)` bits over the clip
/// range; values exactly on a decision boundary go up (toward +½ LSB).
/// A fractional ENOB is reached by adding Gaussian noise with the missing
/// error power `(Δ_enob² − Δ_bits²)/12`. An all-zero channel stays zero.
pub fn quantize_channel(x: &mut [f64], enob: f64, clip_sigma: f64, rng: &mut SimRng) {
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt();
    if rms == 0.0 {
        return;
    }
    let clip = clip_sigma * rms;
    let bits = enob.ceil().max(1.0);
    let levels = 2f64.powf(bits);
    let step = 2.0 * clip / levels;
    let top = clip - step / 2.0;
    let eff_step = 2.0 * clip / 2f64.powf(enob);
    let extra_var = (eff_step * eff_step - step * step) / 12.0;
    let extra_std = extra_var.max(0.0).sqrt();
    for v in x.iter_mut() {
        let c = v.clamp(-clip, clip);
        let q = ((c / step).floor() + 0.5) * step;
        *v = q.clamp(-top, top);
        if extra_std > 0.0 {
            let n: f64 = StandardNormal.sample(rng);
            *v += n * extra_std;
        }
    }
}

/// Zero-order-hold magnitude `|sinc(f/fs)|`, delay removed.
pub fn zoh_magnitude(f: f64, sample_rate: f64) -> f64 {
    let x = std::f64::consts::PI * f / sample_rate;
    if x.abs() < 1e-12 {
        1.0
    } else {
        (x.sin() / x).abs()
    }
}

/// Resamples to the DAC rate, then clips/quantizes the I and Q rails and
/// optionally applies the hold response.
pub fn dac_convert(w: &Waveform, p: &DacParams, rng: &mut SimRng) -> Result<Waveform> {
    let mut out = resample(w, p.sample_rate)?;
    if let Some(enob) = p.enob {
        let mut re: Vec<f64> = out.samples.iter().map(|s| s.re).collect();
        let mut im: Vec<f64> = out.samples.iter().map(|s| s.im).collect();
        quantize_channel(&mut re, enob, p.clip_sigma, rng);
        quantize_channel(&mut im, enob, p.clip_sigma, rng);
        out.samples = re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect();
    }
    if p.include_zoh {
        let rate = out.sample_rate;
        out.samples = apply_real_response(&out.samples, rate, |f| Complex64::new(zoh_magnitude(f, rate), 0.0));
    }
    Ok(out)
}
