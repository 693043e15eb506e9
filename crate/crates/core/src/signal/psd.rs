use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::fft;
use super::{lin_to_db, Waveform};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsdScale {
    /// Power per Hz in the waveform's power unit (mW/Hz for optical fields).
    Linear,
    DbmPerHz,
}

/// Two-sided PSD on an ascending frequency grid relative to the carrier.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub freq_bins: Vec<f64>,
    pub psd: Vec<f64>,
    pub scale: PsdScale,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        if self.freq_bins.len() < 2 {
            return 0.0;
        }
        self.freq_bins[1] - self.freq_bins[0]
    }

    pub fn to_db(&self) -> Spectrum {
        match self.scale {
            PsdScale::DbmPerHz => self.clone(),
            PsdScale::Linear => Spectrum {
                freq_bins: self.freq_bins.clone(),
                psd: self.psd.iter().map(|&p| lin_to_db(p.max(1e-300))).collect(),
                scale: PsdScale::DbmPerHz,
            },
        }
    }

    pub fn to_linear(&self) -> Spectrum {
        match self.scale {
            PsdScale::Linear => self.clone(),
            PsdScale::DbmPerHz => Spectrum {
                freq_bins: self.freq_bins.clone(),
                psd: self.psd.iter().map(|&p| 10f64.powf(p / 10.0)).collect(),
                scale: PsdScale::Linear,
            },
        }
    }

    /// Integrated power over the whole grid.
    pub fn total_power(&self) -> f64 {
        self.band_power(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Integrated power over bins with `lo <= f <= hi`.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        let lin = self.to_linear();
        let df = self.bin_width();
        lin.freq_bins
            .iter()
            .zip(&lin.psd)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, p)| p * df)
            .sum()
    }

    /// Peak-to-peak PSD variation in dB over `lo <= f <= hi`.
    pub fn ripple_db(&self, lo: f64, hi: f64) -> f64 {
        let db = self.to_db();
        let vals: Vec<f64> = db
            .freq_bins
            .iter()
            .zip(&db.psd)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, p)| *p)
            .collect();
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// Welch PSD estimate: Hann window, 50 % overlap, segment length `rate / rbw`.
pub fn estimate_psd(w: &Waveform, resolution_bw: f64) -> Result<Spectrum> {
    if !(resolution_bw > 0.0) {
        return Err(Error::invalid("resolution bandwidth must be positive"));
    }
    if resolution_bw > w.sample_rate / 2.0 {
        return Err(Error::invalid(format!(
            "resolution bandwidth {resolution_bw} Hz is coarser than the {} Hz simulation band",
            w.sample_rate
        )));
    }
    let nfft = (w.sample_rate / resolution_bw).round() as usize;
    if nfft > w.len() {
        return Err(Error::invalid(format!(
            "waveform of {} samples is shorter than one {nfft}-sample resolution cell",
            w.len()
        )));
    }
    let window: Vec<f64> = (0..nfft)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / nfft as f64).cos())
        .collect();
    let wpow: f64 = window.iter().map(|v| v * v).sum();
    let hop = (nfft / 2).max(1);
    let mut acc = vec![0.0; nfft];
    let mut segments = 0usize;
    let mut start = 0;
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    while start + nfft <= w.len() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = w.samples[start + i] * window[i];
        }
        fft(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let norm = 1.0 / (segments as f64 * w.sample_rate * wpow);
    let df = w.sample_rate / nfft as f64;
    // reorder to ascending frequency
    let half = nfft.div_ceil(2);
    let mut freq_bins = Vec::with_capacity(nfft);
    let mut psd = Vec::with_capacity(nfft);
    for k in half..nfft {
        freq_bins.push((k as f64 - nfft as f64) * df);
        psd.push(acc[k] * norm);
    }
    for k in 0..half {
        freq_bins.push(k as f64 * df);
        psd.push(acc[k] * norm);
    }
    Ok(Spectrum {
        freq_bins,
        psd,
        scale: PsdScale::Linear,
    })
}
