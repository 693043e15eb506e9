//! Waveform types and the numerical primitives shared by every stage.

mod fft;
mod io;
mod prbs;
mod psd;
mod resample;
mod rrc;

pub use fft::{apply_real_response, apply_response, circular_shift, fft, fft_freqs, ifft};
pub use io::{read_waveforms, write_waveforms, WaveformSidecar};
pub use prbs::{generate_prbs, PRBS_DEFAULT_SEED};
pub use psd::{estimate_psd, PsdScale, Spectrum};
pub use resample::resample;
pub use rrc::{design_rrc, filter_circular};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result, CARRIER_HZ};

/// Seeded generator used for every random draw in the simulator.
pub type SimRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed from a base seed and a stream label (SplitMix64).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Circular complex Gaussian sample with `E|n|² = variance`.
pub fn complex_gaussian(rng: &mut SimRng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Uniformly sampled complex baseband field.
///
/// When a waveform represents an optical field, mean |x|² is its power in mW.
#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub center_freq: f64,
}

impl Waveform {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        Self::with_center(samples, sample_rate, CARRIER_HZ)
    }

    pub fn with_center(samples: Vec<Complex64>, sample_rate: f64, center_freq: f64) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::invalid(format!("sample rate must be positive, got {sample_rate}")));
        }
        if samples.is_empty() {
            return Err(Error::invalid("waveform has no samples"));
        }
        Ok(Self {
            samples,
            sample_rate,
            center_freq,
        })
    }

    pub fn from_real(values: &[f64], sample_rate: f64) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), sample_rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    /// Mean squared magnitude.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    pub fn power_dbm(&self) -> f64 {
        lin_to_db(self.power())
    }

    pub fn rms(&self) -> f64 {
        self.power().sqrt()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, factor: f64) {
        for s in &mut self.samples {
            *s *= factor;
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut w = self.clone();
        w.scale(factor);
        w
    }

    /// Same metadata, new samples.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            sample_rate: self.sample_rate,
            center_freq: self.center_freq,
        }
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.re).collect()
    }
}

/// Two polarization tributaries sharing one time base.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPolWaveform {
    pub pol_x: Waveform,
    pub pol_y: Waveform,
}

impl DualPolWaveform {
    pub fn new(pol_x: Waveform, pol_y: Waveform) -> Result<Self> {
        if pol_x.len() != pol_y.len() {
            return Err(Error::LengthMismatch {
                expected: pol_x.len(),
                got: pol_y.len(),
            });
        }
        if pol_x.sample_rate != pol_y.sample_rate {
            return Err(Error::invalid("polarizations have different sample rates"));
        }
        Ok(Self { pol_x, pol_y })
    }

    pub fn len(&self) -> usize {
        self.pol_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pol_x.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.pol_x.sample_rate
    }

    /// Total power of both polarizations.
    pub fn power(&self) -> f64 {
        self.pol_x.power() + self.pol_y.power()
    }

    pub fn power_dbm(&self) -> f64 {
        lin_to_db(self.power())
    }

    pub fn scale(&mut self, factor: f64) {
        self.pol_x.scale(factor);
        self.pol_y.scale(factor);
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut d = self.clone();
        d.scale(factor);
        d
    }

    /// Applies the same transformation to both polarizations.
    pub fn map_pols(&self, mut f: impl FnMut(&Waveform) -> Waveform) -> Result<Self> {
        Self::new(f(&self.pol_x), f(&self.pol_y))
    }

    /// Fallible variant of [`DualPolWaveform::map_pols`].
    pub fn try_map_pols(&self, mut f: impl FnMut(&Waveform) -> Result<Waveform>) -> Result<Self> {
        Self::new(f(&self.pol_x)?, f(&self.pol_y)?)
    }
}
