use serde::{Deserialize, Serialize};

use crate::signal::{complex_gaussian, db_to_lin, estimate_psd, lin_to_db, DualPolWaveform, SimRng, Waveform};
use crate::{Error, Result, PLANCK, SPEED_OF_LIGHT};

/// OSNR reference bandwidth (the 0.1-nm convention), Hz.
pub const OSNR_REF_BW_HZ: f64 = 12.5e9;

/// Width in Hz of `bw_nm` at the optical frequency `center_freq`.
pub fn osnr_ref_bandwidth_from_nm(bw_nm: f64, center_freq: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / center_freq;
    SPEED_OF_LIGHT * bw_nm * 1e-9 / (lambda * lambda)
}

/// Bookkeeping of signal power and noise power in the OSNR reference band.
///
/// Both quantities count both polarizations, in mW.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRecord {
    pub signal_mw: f64,
    pub noise_ref_mw: f64,
}

impl NoiseRecord {
    pub fn clean(signal_mw: f64) -> Self {
        Self {
            signal_mw,
            noise_ref_mw: 0.0,
        }
    }

    pub fn osnr(&self) -> f64 {
        self.signal_mw / self.noise_ref_mw
    }

    pub fn osnr_db(&self) -> f64 {
        lin_to_db(self.osnr())
    }

    /// Applies a common power gain to signal and noise.
    pub fn scaled(&self, power_gain: f64) -> Self {
        Self {
            signal_mw: self.signal_mw * power_gain,
            noise_ref_mw: self.noise_ref_mw * power_gain,
        }
    }
}

/// Exact OSNR of a tracked signal, dB re 12.5 GHz.
pub fn measure_osnr(record: &NoiseRecord) -> f64 {
    record.osnr_db()
}

/// OSNR estimate from the spectrum alone.
///
/// The noise floor is read from the band between `signal_bw_hz / 2` and
/// 95% of Nyquist and assumed white across the whole simulation band.
pub fn estimate_osnr(sig: &DualPolWaveform, signal_bw_hz: f64) -> Result<f64> {
    let rate = sig.sample_rate();
    let lo = 0.55 * signal_bw_hz;
    let hi = 0.95 * rate / 2.0;
    if hi - lo < 0.02 * rate {
        return Err(Error::invalid("no out-of-band region visible for the OSNR estimator"));
    }
    let rbw = (rate / 4096.0).max(rate / sig.len() as f64 * 8.0);
    let mut floor = 0.0;
    let mut total = 0.0;
    for pol in [&sig.pol_x, &sig.pol_y] {
        let s = estimate_psd(pol, rbw)?;
        let oob: Vec<f64> = s
            .freq_bins
            .iter()
            .zip(&s.psd)
            .filter(|(f, _)| f.abs() > lo && f.abs() < hi)
            .map(|(_, p)| *p)
            .collect();
        floor += oob.iter().sum::<f64>() / oob.len() as f64;
        total += pol.power();
    }
    let noise_total = floor * rate;
    let signal = total - noise_total;
    if signal <= 0.0 {
        return Err(Error::invalid("estimated noise exceeds total power"));
    }
    Ok(lin_to_db(signal / (floor * OSNR_REF_BW_HZ)))
}

/// Scales both polarizations so the total power is `target_dbm`.
pub fn set_power(sig: &DualPolWaveform, target_dbm: f64) -> Result<DualPolWaveform> {
    let p = sig.power();
    if !(p > 0.0) {
        return Err(Error::invalid("cannot set the power of an all-zero signal"));
    }
    Ok(sig.scaled((db_to_lin(target_dbm) / p).sqrt()))
}

fn add_white_noise(w: &Waveform, variance: f64, rng: &mut SimRng) -> Waveform {
    if variance == 0.0 {
        return w.clone();
    }
    w.with_samples(w.samples.iter().map(|s| s + complex_gaussian(rng, variance)).collect())
}

/// Adds white Gaussian noise to both polarizations to reach `target_osnr_db`.
///
/// Noise already present in `record` counts toward the target. An infinite
/// target leaves the signal untouched.
pub fn load_noise_to_osnr(
    sig: &DualPolWaveform,
    record: &NoiseRecord,
    target_osnr_db: f64,
    rng: &mut SimRng,
) -> Result<(DualPolWaveform, NoiseRecord)> {
    if target_osnr_db == f64::INFINITY {
        return Ok((sig.clone(), *record));
    }
    let wanted = record.signal_mw / db_to_lin(target_osnr_db);
    let extra = wanted - record.noise_ref_mw;
    if extra < -1e-12 * wanted {
        return Err(Error::OsnrUnreachable {
            target_db: target_osnr_db,
            current_db: record.osnr_db(),
        });
    }
    let extra = extra.max(0.0);
    // per-pol PSD = extra / (2 B_ref), integrated over the simulation band
    let var = extra / (2.0 * OSNR_REF_BW_HZ) * sig.sample_rate();
    let out = DualPolWaveform::new(add_white_noise(&sig.pol_x, var, rng), add_white_noise(&sig.pol_y, var, rng))?;
    Ok((
        out,
        NoiseRecord {
            signal_mw: record.signal_mw,
            noise_ref_mw: wanted,
        },
    ))
}

/// Optical amplifier with ASE noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmpParams {
    pub gain_db: f64,
    pub noise_figure_db: f64,
}

impl Default for AmpParams {
    fn default() -> Self {
        Self {
            gain_db: 24.0,
            noise_figure_db: 5.0,
        }
    }
}

impl AmpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain_db >= 0.0) {
            return Err(Error::invalid("amplifier gain must be nonnegative"));
        }
        Ok(())
    }
}

/// ASE PSD per polarization, `(G−1)·F·hν/2`, in mW/Hz.
pub fn ase_psd_mw_per_hz(p: &AmpParams, center_freq: f64) -> f64 {
    let g = db_to_lin(p.gain_db);
    (g - 1.0) * db_to_lin(p.noise_figure_db) * PLANCK * center_freq / 2.0 * 1e3
}

pub fn amplify_with_ase(
    sig: &DualPolWaveform,
    record: &NoiseRecord,
    p: &AmpParams,
    rng: &mut SimRng,
) -> Result<(DualPolWaveform, NoiseRecord)> {
    p.validate()?;
    let g = db_to_lin(p.gain_db);
    let psd = ase_psd_mw_per_hz(p, sig.pol_x.center_freq);
    let var = psd * sig.sample_rate();
    let amplified = sig.scaled(g.sqrt());
    let out = DualPolWaveform::new(
        add_white_noise(&amplified.pol_x, var, rng),
        add_white_noise(&amplified.pol_y, var, rng),
    )?;
    let mut rec = record.scaled(g);
    rec.noise_ref_mw += 2.0 * psd * OSNR_REF_BW_HZ;
    Ok((out, rec))
}
