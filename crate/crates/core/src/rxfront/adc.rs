use serde::{Deserialize, Serialize};

use super::detect::DetectedStreams;
use crate::eo::bessel4_lowpass;
use crate::signal::{apply_real_response, resample, SimRng, Waveform};
use crate::txdsp::quantize_channel;
use crate::{Error, Result};

/// Real-time oscilloscope front end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdcParams {
    pub sample_rate: f64,
    /// `None` disables the anti-alias filter.
    pub analog_bw_hz: Option<f64>,
    /// `None` disables quantization.
    pub enob: Option<f64>,
    pub clip_sigma: f64,
    /// Samples acquired per channel for one measurement point.
    pub capture_len: usize,
}

impl Default for AdcParams {
    fn default() -> Self {
        Self {
            sample_rate: 80e9,
            analog_bw_hz: Some(33e9),
            enob: Some(5.5),
            clip_sigma: 3.3,
            capture_len: 1 << 20,
        }
    }
}

impl AdcParams {
    pub fn transparent(sample_rate: f64) -> Self {
        Self {
            sample_rate,
            analog_bw_hz: None,
            enob: None,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0) {
            return Err(Error::invalid("ADC sample rate must be positive"));
        }
        if matches!(self.analog_bw_hz, Some(b) if !(b > 0.0)) {
            return Err(Error::invalid("ADC bandwidth must be positive"));
        }
        if matches!(self.enob, Some(e) if !(e >= 1.0)) {
            return Err(Error::invalid("ADC ENOB must be at least 1"));
        }
        if self.capture_len == 0 {
            return Err(Error::invalid("capture length must be nonzero"));
        }
        Ok(())
    }
}

/// Bessel anti-alias filter, resampling to the scope rate, then clip/quantize per channel.
pub fn adc_capture(streams: &DetectedStreams, p: &AdcParams, rng: &mut SimRng) -> Result<DetectedStreams> {
    p.validate()?;
    if streams.sample_rate < p.sample_rate {
        return Err(Error::invalid(format!(
            "ADC input at {} Sa/s is below the capture rate {}",
            streams.sample_rate, p.sample_rate
        )));
    }
    let dual = streams.to_dual_pol()?;
    let digitize = |w: &Waveform| -> Result<Waveform> {
        let filtered = match p.analog_bw_hz {
            Some(bw) => w.with_samples(apply_real_response(&w.samples, w.sample_rate, |f| bessel4_lowpass(f, bw))),
            None => w.clone(),
        };
        resample(&filtered, p.sample_rate)
    };
    let mut out = DetectedStreams::from_dual_pol(&dual.try_map_pols(digitize)?);
    if let Some(enob) = p.enob {
        for v in out.streams_mut() {
            quantize_channel(v, enob, p.clip_sigma, rng);
        }
    }
    Ok(out)
}
