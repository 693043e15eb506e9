use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::signal::{apply_response, fft, fft_freqs, ifft, DualPolWaveform, Waveform};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Standard single-mode fiber span.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FiberParams {
    pub length_km: f64,
    /// Dispersion parameter D, ps/(nm·km).
    pub dispersion_d: f64,
    pub alpha_db_km: f64,
    /// Nonlinear coefficient, 1/(W·km).
    pub gamma: f64,
    pub step_m: f64,
}

impl Default for FiberParams {
    fn default() -> Self {
        Self {
            length_km: 120.0,
            dispersion_d: 17.0,
            alpha_db_km: 0.2,
            gamma: 1.3,
            step_m: 100.0,
        }
    }
}

impl FiberParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_km >= 0.0) {
            return Err(Error::invalid("fiber length must be nonnegative"));
        }
        if !(self.alpha_db_km >= 0.0) {
            return Err(Error::invalid("fiber attenuation must be nonnegative"));
        }
        if !(self.step_m > 0.0) {
            return Err(Error::invalid("split-step size must be positive"));
        }
        if self.length_km > 0.0 && self.step_m > self.length_km * 1e3 {
            return Err(Error::invalid(format!(
                "split-step size {} m is coarser than the {} km span",
                self.step_m, self.length_km
            )));
        }
        Ok(())
    }

    pub fn loss_db(&self) -> f64 {
        self.alpha_db_km * self.length_km
    }

    fn steps(&self) -> usize {
        ((self.length_km * 1e3 / self.step_m) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Group-velocity dispersion β₂ in s²/km for D in ps/(nm·km) at `center_freq`.
pub fn beta2_s2_per_km(dispersion_d: f64, center_freq: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / center_freq;
    let d_si = dispersion_d * 1e-6; // s/m²
    -d_si * lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT) * 1e3
}

/// Linear operator over `dz_km`: dispersion phase and field attenuation.
///
/// The FFT kernel is `e^{-jωt}`, so `∂/∂t ↔ jω` and the dispersion term of
/// `∂A/∂z = −jβ₂/2·∂²A/∂t²` becomes `exp(+jβ₂/2·ω²·dz)`.
fn linear_operator(freqs: &[f64], beta2: f64, alpha_np_km: f64, dz_km: f64) -> Vec<Complex64> {
    let loss = (-alpha_np_km * dz_km / 2.0).exp();
    freqs
        .iter()
        .map(|f| {
            let w = 2.0 * PI * f;
            Complex64::from_polar(loss, beta2 / 2.0 * w * w * dz_km)
        })
        .collect()
}

fn alpha_np_km(alpha_db_km: f64) -> f64 {
    alpha_db_km * std::f64::consts::LN_10 / 10.0
}

fn warn_if_aliasing(samples: &[Complex64], sample_rate: f64) {
    let mut spec = samples.to_vec();
    fft(&mut spec);
    let edge = 0.8 * sample_rate / 2.0;
    let (mut total, mut outer) = (0.0, 0.0);
    for (v, f) in spec.iter().zip(fft_freqs(samples.len(), sample_rate)) {
        let p = v.norm_sqr();
        total += p;
        if f.abs() > edge {
            outer += p;
        }
    }
    if total > 0.0 && outer / total > 1e-2 {
        log::warn!(
            "{:.2}% of the signal power lies beyond 80% of Nyquist; split-step may alias",
            100.0 * outer / total
        );
    }
}

fn linear_ops(fp: &FiberParams, n: usize, sample_rate: f64, center_freq: f64) -> (Vec<Complex64>, Vec<Complex64>, usize, f64) {
    let steps = fp.steps();
    let h = fp.length_km / steps as f64;
    let freqs = fft_freqs(n, sample_rate);
    let beta2 = beta2_s2_per_km(fp.dispersion_d, center_freq);
    let a = alpha_np_km(fp.alpha_db_km);
    (linear_operator(&freqs, beta2, a, h / 2.0), linear_operator(&freqs, beta2, a, h), steps, h)
}

fn mul(buf: &mut [Complex64], op: &[Complex64]) {
    for (v, o) in buf.iter_mut().zip(op) {
        *v *= o;
    }
}

/// Manakov split-step propagation through one span (symmetric scheme).
///
/// Fields are in √mW; γ is scaled accordingly.
pub fn propagate_ssmf(sig: &DualPolWaveform, fp: &FiberParams) -> Result<DualPolWaveform> {
    fp.validate()?;
    if fp.length_km == 0.0 {
        return Ok(sig.clone());
    }
    let rate = sig.sample_rate();
    warn_if_aliasing(&sig.pol_x.samples, rate);
    let (half, full, steps, h) = linear_ops(fp, sig.len(), rate, sig.pol_x.center_freq);
    let k = fp.gamma * 1e-3 * 8.0 / 9.0 * h;

    let mut x = sig.pol_x.samples.clone();
    let mut y = sig.pol_y.samples.clone();
    let linear = |x: &mut Vec<Complex64>, y: &mut Vec<Complex64>, op: &[Complex64]| {
        rayon::join(
            || {
                fft(x);
                mul(x, op);
                ifft(x);
            },
            || {
                fft(y);
                mul(y, op);
                ifft(y);
            },
        );
    };
    linear(&mut x, &mut y, &half);
    for s in 0..steps {
        for (a, b) in x.iter_mut().zip(y.iter_mut()) {
            let rot = Complex64::from_polar(1.0, k * (a.norm_sqr() + b.norm_sqr()));
            *a *= rot;
            *b *= rot;
        }
        let op = if s + 1 == steps { &half } else { &full };
        linear(&mut x, &mut y, op);
    }
    DualPolWaveform::new(sig.pol_x.with_samples(x), sig.pol_y.with_samples(y))
}

/// Single-polarization NLSE (full γ, no Manakov averaging).
pub fn propagate_scalar(sig: &Waveform, fp: &FiberParams) -> Result<Waveform> {
    fp.validate()?;
    if fp.length_km == 0.0 {
        return Ok(sig.clone());
    }
    let (half, full, steps, h) = linear_ops(fp, sig.len(), sig.sample_rate, sig.center_freq);
    let k = fp.gamma * 1e-3 * h;
    let mut x = sig.samples.clone();
    fft(&mut x);
    mul(&mut x, &half);
    ifft(&mut x);
    for s in 0..steps {
        for a in x.iter_mut() {
            *a *= Complex64::from_polar(1.0, k * a.norm_sqr());
        }
        fft(&mut x);
        mul(&mut x, if s + 1 == steps { &half } else { &full });
        ifft(&mut x);
    }
    Ok(sig.with_samples(x))
}

/// Removes the dispersion of `length_km` of fiber from one polarization.
pub fn compensate_cd_pol(w: &Waveform, dispersion_d: f64, length_km: f64) -> Waveform {
    if dispersion_d * length_km == 0.0 {
        return w.clone();
    }
    let beta2 = beta2_s2_per_km(dispersion_d, w.center_freq);
    let samples = apply_response(&w.samples, w.sample_rate, |f| {
        let om = 2.0 * PI * f;
        Complex64::from_polar(1.0, -beta2 / 2.0 * om * om * length_km)
    });
    w.with_samples(samples)
}

/// All-pass dispersion compensation, both polarizations.
pub fn compensate_cd(sig: &DualPolWaveform, dispersion_d: f64, length_km: f64) -> Result<DualPolWaveform> {
    sig.map_pols(|w| compensate_cd_pol(w, dispersion_d, length_km))
}
