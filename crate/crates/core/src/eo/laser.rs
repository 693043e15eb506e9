use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::signal::{db_to_lin, SimRng};
use crate::{Result, CARRIER_HZ};

/// CW laser with Lorentzian linewidth (Wiener phase walk).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaserModel {
    pub center_freq: f64,
    pub power_dbm: f64,
    pub linewidth_hz: f64,
    pub freq_offset_hz: f64,
}

impl Default for LaserModel {
    fn default() -> Self {
        Self {
            center_freq: CARRIER_HZ,
            power_dbm: 16.0,
            linewidth_hz: 100e3,
            freq_offset_hz: 0.0,
        }
    }
}

impl LaserModel {
    pub fn ideal() -> Self {
        Self {
            linewidth_hz: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.linewidth_hz >= 0.0) {
            return Err(crate::Error::invalid("laser linewidth must be nonnegative"));
        }
        Ok(())
    }

    /// Phase walk starting at 0 with per-sample variance `2π·linewidth/rate`.
    pub fn phase_noise(&self, n: usize, sample_rate: f64, rng: &mut SimRng) -> Vec<f64> {
        let var = 2.0 * PI * self.linewidth_hz / sample_rate;
        let mut out = Vec::with_capacity(n);
        let mut phi = 0.0;
        if var > 0.0 {
            let step = Normal::new(0.0, var.sqrt()).expect("finite variance");
            for _ in 0..n {
                out.push(phi);
                phi += step.sample(rng);
            }
        } else {
            out.resize(n, 0.0);
        }
        out
    }

    /// Phase walk pinned so that sample `n` would return to the start.
    ///
    /// Simulated frames are circular (one period of a repeating pattern), so
    /// the walk is closed into a Brownian bridge to keep the phase continuous
    /// across the wrap.
    pub fn closed_phase_noise(&self, n: usize, sample_rate: f64, rng: &mut SimRng) -> Vec<f64> {
        let mut walk = self.phase_noise(n + 1, sample_rate, rng);
        let end = walk.pop().unwrap_or(0.0);
        for (k, p) in walk.iter_mut().enumerate() {
            *p -= end * k as f64 / n as f64;
        }
        walk
    }

    /// Complex field `√P · exp(j(φ(t) + 2π·Δf·t))`, power in mW, with the
    /// closed phase walk.
    pub fn field(&self, n: usize, sample_rate: f64, rng: &mut SimRng) -> Vec<Complex64> {
        let amp = db_to_lin(self.power_dbm).sqrt();
        let phase = self.closed_phase_noise(n, sample_rate, rng);
        phase
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let t = i as f64 / sample_rate;
                Complex64::from_polar(amp, p + 2.0 * PI * self.freq_offset_hz * t)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::rng_from_seed;

    #[test]
    fn phase_variance_matches_linewidth() {
        let laser = LaserModel {
            linewidth_hz: 1e6,
            ..Default::default()
        };
        let rate = 64e9;
        let n = 4096;
        let tau = (n - 1) as f64 / rate;
        let runs = 2000;
        let mut acc = 0.0;
        for seed in 0..runs {
            let p = laser.phase_noise(n, rate, &mut rng_from_seed(seed));
            acc += p[n - 1].powi(2);
        }
        let var = acc / runs as f64;
        let expected = 2.0 * PI * laser.linewidth_hz * tau;
        assert!((var / expected - 1.0).abs() < 0.05, "{var} vs {expected}");
    }

    #[test]
    fn closed_walk_keeps_short_lag_statistics() {
        let laser = LaserModel::default();
        let rate = 128e9;
        let n = 70504;
        let lag = 1000;
        let runs = 300;
        let mut acc = 0.0;
        let mut count = 0.0;
        for seed in 0..runs {
            let p = laser.closed_phase_noise(n, rate, &mut rng_from_seed(seed));
            assert_eq!(p[0], 0.0);
            for k in (0..n - lag).step_by(997) {
                acc += (p[k + lag] - p[k]).powi(2);
                count += 1.0;
            }
        }
        let var = acc / count;
        // bridge increment variance: σ²·lag·(1 − lag/n)
        let sigma2 = 2.0 * PI * laser.linewidth_hz / rate;
        let expected = sigma2 * lag as f64 * (1.0 - lag as f64 / n as f64);
        assert!((var / expected - 1.0).abs() < 0.05, "{var} vs {expected}");
    }

    #[test]
    fn power_and_zero_linewidth() {
        let laser = LaserModel::ideal();
        let f = laser.field(100, 1e9, &mut rng_from_seed(1));
        for v in f {
            assert!((v.norm_sqr() - db_to_lin(16.0)).abs() < 1e-9);
            assert!(v.arg().abs() < 1e-12);
        }
    }
}
